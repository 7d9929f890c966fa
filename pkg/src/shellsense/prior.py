"""Gaussian-process prior over the three surface-pressure components.

Each component is an independent stationary random field on the barrel
surface with a product kernel: a periodic correlation in the meridional
angle times a Matern-3/2 correlation in the vertical coordinate. The
marginal variance multiplies the product once, so both factors are unit
correlations. Discretizing at the patch nodes gives a block-diagonal
Gaussian over the stacked (N, H, V) nodal pressures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .geometry.cylinder import GeometryError, Mesh
from .geometry.surface import SurfacePatch

_SQRT3 = math.sqrt(3.0)
_TWO_PI = 2.0 * math.pi

#: Relative diagonal jitter applied before factorization.
JITTER = 1e-8

COMPONENTS = ("N", "H", "V")


class PriorError(ValueError):
    """Invalid kernel configuration or non-factorizable covariance."""


@dataclass(frozen=True)
class KernelConfig:
    """Marginal standard deviation [Pa] and the two lengthscales."""

    sigma: float
    meridional_lengthscale: float = math.pi / 20.0
    vertical_lengthscale: float = 0.50

    def __post_init__(self):
        if self.sigma <= 0 or self.meridional_lengthscale <= 0 \
                or self.vertical_lengthscale <= 0:
            raise PriorError(f"kernel parameters must be positive: {self}")


#: Hyperparameters used throughout the reference configuration.
DEFAULT_KERNELS = {
    "N": KernelConfig(sigma=4.0e6),
    "H": KernelConfig(sigma=0.5e6),
    "V": KernelConfig(sigma=0.5e6),
}


def matern32(distance, lengthscale: float):
    """Matern nu=3/2 correlation (1 + sqrt(3) d/l) exp(-sqrt(3) d/l)."""
    distance = np.asarray(distance, dtype=float)
    if np.any(distance < 0):
        raise PriorError("matern32 requires nonnegative distances")
    if lengthscale <= 0:
        raise PriorError("matern32 requires a positive lengthscale")
    s = _SQRT3 * distance / lengthscale
    return (1.0 + s) * np.exp(-s)


def periodic_kernel(theta, theta_prime, lengthscale: float):
    """Exponential-of-sine-squared correlation, 2*pi-periodic.

    Computed on the absolute wrapped angle difference so the result is
    bitwise symmetric in its arguments.
    """
    if lengthscale <= 0:
        raise PriorError("periodic kernel requires a positive lengthscale")
    delta = np.mod(np.abs(np.asarray(theta, dtype=float)
                          - np.asarray(theta_prime, dtype=float)), _TWO_PI)
    s = np.sin(0.5 * delta)
    return np.exp(-2.0 * (s / lengthscale) ** 2)


def product_kernel(x, x_prime, cfg: KernelConfig):
    """Covariance [Pa^2] between two points on the barrel surface."""
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    for p in (x, x_prime):
        if math.hypot(p[0], p[1]) < 1e-12:
            raise PriorError("meridional angle undefined on the cylinder axis")
    theta = math.atan2(x[1], x[0])
    theta_p = math.atan2(x_prime[1], x_prime[0])
    k_meridional = periodic_kernel(theta, theta_p, cfg.meridional_lengthscale)
    k_vertical = matern32(abs(x[2] - x_prime[2]), cfg.vertical_lengthscale)
    return cfg.sigma ** 2 * k_meridional * k_vertical


def kernel_gram(theta: np.ndarray, z: np.ndarray,
                cfg: KernelConfig) -> np.ndarray:
    """Dense covariance over nodes given angles and vertical coordinates."""
    k_m = periodic_kernel(theta[:, None], theta[None, :],
                          cfg.meridional_lengthscale)
    dz = np.abs(z[:, None] - z[None, :])
    return cfg.sigma ** 2 * k_m * matern32(dz, cfg.vertical_lengthscale)


@dataclass
class BlockGaussian:
    """Gaussian over stacked nodal pressures with block-diagonal covariance.

    ``blocks`` holds the raw kernel Gram matrices in (N, H, V) order;
    the effective covariance used for sampling and conditioning adds
    ``jitter`` (relative to each block's variance) on the diagonal.
    """

    mean: np.ndarray
    blocks: tuple
    jitter: float = JITTER
    _chols: list = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.mean.shape[0]

    @property
    def block_size(self) -> int:
        return self.blocks[0].shape[0]

    def effective_block(self, i: int) -> np.ndarray:
        block = self.blocks[i]
        sigma2 = block[0, 0]
        return block + (self.jitter * sigma2) * np.eye(block.shape[0])

    def variances(self) -> np.ndarray:
        """Effective marginal variances, stacked in block order."""
        return np.concatenate(
            [np.diag(self.effective_block(i)) for i in range(3)]
        )

    def cholesky_blocks(self) -> list:
        if self._chols is None:
            chols = []
            for i in range(3):
                try:
                    chols.append(sla.cholesky(self.effective_block(i),
                                              lower=True))
                except sla.LinAlgError as exc:
                    raise PriorError(
                        f"covariance block {COMPONENTS[i]} not positive "
                        f"definite even with jitter {self.jitter}"
                    ) from exc
            self._chols = chols
        return self._chols


def assemble_prior(mesh: Mesh, patch: SurfacePatch,
                   cfg_n: KernelConfig, cfg_h: KernelConfig,
                   cfg_v: KernelConfig,
                   means=(0.0, 0.0, 0.0),
                   jitter: float = JITTER) -> BlockGaussian:
    """Discretize the three component processes at the patch nodes.

    Flange nodes inherit the barrel angle of their meridional position;
    their vertical coordinate drives the Matern factor.
    """
    if len(patch) == 0:
        raise PriorError("cannot build a prior over an empty patch")
    theta = mesh.node_angles(patch.node_ids)
    z = mesh.nodes[patch.node_ids, 2]
    blocks = tuple(kernel_gram(theta, z, cfg)
                   for cfg in (cfg_n, cfg_h, cfg_v))
    n = len(patch)
    mean = np.concatenate([np.full(n, float(m)) for m in means])
    prior = BlockGaussian(mean=mean, blocks=blocks, jitter=jitter)
    prior.cholesky_blocks()  # fail fast if not factorizable
    return prior


def sample_prior(prior: BlockGaussian, seed, count: int) -> np.ndarray:
    """Draw *count* pressure vectors, shape (count, 3 * n_patch)."""
    rng = np.random.default_rng(seed)
    n = prior.block_size
    out = np.empty((count, prior.size))
    chols = prior.cholesky_blocks()
    for i, chol in enumerate(chols):
        noise = rng.standard_normal((n, count))
        out[:, i * n:(i + 1) * n] = (chol @ noise).T
    return out + prior.mean
