"""Closed-form Gaussian conditioning of the pressure prior on strains.

The linear strain model with additive Gaussian noise keeps the posterior
Gaussian, so conditioning reduces to the prior predictive covariance,
the Kalman gain, and the standard mean/covariance update. The block
structure of the prior is exploited throughout; the full prior
covariance is never formed unless the dense posterior covariance is
requested.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .elasticity.operators import LoadOperator, ObservationOperator
from .elasticity.stiffness import StiffnessSystem
from .prior import BlockGaussian
from .strain_csv import StrainSeries

logger = logging.getLogger(__name__)

#: Default observation-noise standard deviation (strain); roughly a
#: foil-gauge noise floor. Every analysis states its own value.
DEFAULT_NOISE_STD = 1e-6

#: Condition-number threshold that triggers an ill-conditioning warning.
CONDITION_WARN = 1e14


class InferenceError(ValueError):
    """Inconsistent dimensions or invalid observations."""


@dataclass(frozen=True)
class ObservationSet:
    """One strain record: values per live gauge, noise level, timestamp.

    A zero noise level marks exact synthetic data; conditioning itself
    always requires a positive level.
    """

    strains: np.ndarray
    noise_std: float
    timestamp: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite(self.strains)):
            raise InferenceError("non-finite strain observations")
        if not np.isfinite(self.noise_std) or self.noise_std < 0:
            raise InferenceError(
                f"noise std must be finite and nonnegative, got {self.noise_std}"
            )


@dataclass
class Posterior:
    """Gaussian posterior over stacked (N, H, V) nodal pressures."""

    mean: np.ndarray
    variances: np.ndarray
    covariance: np.ndarray | None = None
    gain: np.ndarray | None = None
    timestamp: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.variances, 0.0))


def _h_blocks(observation: ObservationOperator, n: int):
    h = observation.matrix
    return tuple(h[:, i * n:(i + 1) * n] for i in range(3))


def prior_predictive_cov(observation: ObservationOperator,
                         prior: BlockGaussian,
                         noise_std: float) -> np.ndarray:
    """Covariance of predicted strains under the prior plus noise."""
    if noise_std <= 0:
        raise InferenceError(f"noise std must be positive, got {noise_std}")
    n = prior.block_size
    if observation.matrix.shape[1] != 3 * n:
        raise InferenceError(
            f"operator expects {observation.matrix.shape[1]} pressure DOFs, "
            f"prior has {3 * n}"
        )
    h_blocks = _h_blocks(observation, n)
    cov = noise_std ** 2 * np.eye(observation.matrix.shape[0])
    for hb, i in zip(h_blocks, range(3)):
        cov += hb @ prior.effective_block(i) @ hb.T
    return 0.5 * (cov + cov.T)


def _cross_cov(observation: ObservationOperator,
               prior: BlockGaussian) -> np.ndarray:
    """Sigma_p H^T, stacked in block order, shape (3n, n_gauges)."""
    n = prior.block_size
    h_blocks = _h_blocks(observation, n)
    return np.vstack([prior.effective_block(i) @ hb.T
                      for i, hb in enumerate(h_blocks)])


def kalman_gain(prior: BlockGaussian, observation: ObservationOperator,
                predictive_cov: np.ndarray) -> np.ndarray:
    """Gain mapping strain innovations to pressure updates.

    Solved against the Cholesky factor of the predictive covariance;
    the inverse is never formed. Logs a warning diagnostic when the
    predictive covariance is ill-conditioned (> 1e14).
    """
    cond = np.linalg.cond(predictive_cov)
    if cond > CONDITION_WARN:
        logger.warning(
            "prior predictive covariance is ill-conditioned "
            "(condition number %.3e)", cond,
        )
    cross = _cross_cov(observation, prior)
    cho = sla.cho_factor(predictive_cov, lower=True)
    return sla.cho_solve(cho, cross.T).T


def condition(prior: BlockGaussian, observation: ObservationOperator,
              obs: ObservationSet, full_cov: bool = True,
              keep_gain: bool = False) -> Posterior:
    """Posterior mean and covariance given one strain record."""
    n_gauges = observation.matrix.shape[0]
    if obs.strains.shape[0] != n_gauges:
        raise InferenceError(
            f"observation has {obs.strains.shape[0]} strains, "
            f"operator expects {n_gauges}"
        )
    predictive = prior_predictive_cov(observation, prior, obs.noise_std)
    gain = kalman_gain(prior, observation, predictive)
    cross = _cross_cov(observation, prior)

    innovation = obs.strains - observation.matrix @ prior.mean
    mean = prior.mean + gain @ innovation
    variances = prior.variances() - np.einsum("ij,ij->i", gain, cross)
    covariance = None
    if full_cov:
        n = prior.block_size
        covariance = sla.block_diag(*(prior.effective_block(i)
                                      for i in range(3)))
        covariance -= gain @ cross.T
        covariance = 0.5 * (covariance + covariance.T)
        variances = np.diag(covariance).copy()

    residual = obs.strains - observation.matrix @ mean
    diagnostics = {
        "n_gauges": n_gauges,
        "residual_max": float(np.abs(residual).max()),
        "data_misfit": float(np.linalg.norm(residual)),
        "innovation_norm": float(np.linalg.norm(innovation)),
        "predictive_condition": float(np.linalg.cond(predictive)),
    }
    return Posterior(
        mean=mean,
        variances=variances,
        covariance=covariance,
        gain=gain if keep_gain else None,
        timestamp=obs.timestamp,
        diagnostics=diagnostics,
    )


def posterior_predictive_strain(posterior: Posterior,
                                observation: ObservationOperator,
                                obs: ObservationSet):
    """Strains implied by the posterior mean, and the worst residual."""
    predicted = observation.matrix @ posterior.mean
    residual = float(np.abs(obs.strains - predicted).max())
    return predicted, residual


def posterior_displacement(posterior: Posterior, system: StiffnessSystem,
                           loads: LoadOperator) -> np.ndarray:
    """Displacement field driven by the posterior-mean pressures."""
    return system.solve(loads.matrix @ posterior.mean)


def infer_timeseries(series: StrainSeries,
                     observation: ObservationOperator,
                     prior: BlockGaussian,
                     noise_std: float,
                     full_cov: bool = False,
                     threads: int = 1) -> list:
    """Condition the prior independently on every record of *series*.

    Gauge columns are matched to operator rows by id; a record's invalid
    gauges are handled by deleting the matching rows. Gains and variance
    reductions are computed once per distinct validity mask and shared
    read-only across records, so per-record work is a single gain-vector
    product. Records with no valid gauges are skipped with a warning.
    Results are ordered like the series regardless of *threads*.
    """
    if noise_std <= 0:
        raise InferenceError(f"noise std must be positive, got {noise_std}")
    row_of = {gid: i for i, gid in enumerate(observation.gauge_ids)}
    try:
        col_rows = np.array([row_of[g] for g in series.gauge_ids])
    except KeyError as exc:
        raise InferenceError(
            f"series gauge {exc.args[0]!r} not present in the observation "
            "operator"
        ) from exc
    if series.values.shape[1] != len(series.gauge_ids):
        raise InferenceError("series values/gauge-id shape mismatch")

    cache: dict = {}
    work = []
    for i in range(len(series)):
        t = float(series.times[i])
        mask = series.valid[i]
        if not mask.any():
            logger.warning("record t=%s has no valid gauges; skipped", t)
            continue
        if not np.all(np.isfinite(series.values[i][mask])):
            raise InferenceError(f"non-finite strain in record t={t}")
        key = mask.tobytes()
        if key not in cache:
            rows = col_rows[mask]
            sub = ObservationOperator(
                matrix=observation.matrix[rows],
                gauge_ids=tuple(observation.gauge_ids[r] for r in rows),
                patch=observation.patch,
            )
            cache[key] = _MaskContext(sub, prior, noise_std, full_cov)
        work.append((cache[key], series.values[i][mask], t))

    if threads > 1 and len(work) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(
                lambda job: job[0].condition(job[1], job[2]), work))
    return [ctx.condition(strains, t) for ctx, strains, t in work]


class _MaskContext:
    """Per-validity-mask factorizations shared across records.

    The gain, variance reduction, and (optionally) the dense posterior
    covariance depend only on the operator rows and noise level, so they
    are computed once; each record then needs a single gain-vector
    product. The covariance array is shared read-only among the
    posteriors of a mask group.
    """

    def __init__(self, sub: ObservationOperator, prior: BlockGaussian,
                 noise_std: float, full_cov: bool):
        self.sub = sub
        self.prior = prior
        self.noise_std = noise_std
        self.predictive = prior_predictive_cov(sub, prior, noise_std)
        self.gain = kalman_gain(prior, sub, self.predictive)
        self.cross = _cross_cov(sub, prior)
        self.covariance = None
        if full_cov:
            cov = sla.block_diag(*(prior.effective_block(i)
                                   for i in range(3)))
            cov -= self.gain @ self.cross.T
            cov = 0.5 * (cov + cov.T)
            cov.setflags(write=False)
            self.covariance = cov
            self.variances = np.diag(cov).copy()
        else:
            self.variances = (prior.variances()
                              - np.einsum("ij,ij->i", self.gain, self.cross))
        self.condition_number = float(np.linalg.cond(self.predictive))

    def condition(self, strains: np.ndarray, timestamp: float) -> Posterior:
        obs = ObservationSet(strains=strains, noise_std=self.noise_std,
                             timestamp=timestamp)
        innovation = obs.strains - self.sub.matrix @ self.prior.mean
        mean = self.prior.mean + self.gain @ innovation
        residual = obs.strains - self.sub.matrix @ mean
        return Posterior(
            mean=mean,
            variances=self.variances.copy(),
            covariance=self.covariance,
            timestamp=timestamp,
            diagnostics={
                "n_gauges": self.sub.matrix.shape[0],
                "residual_max": float(np.abs(residual).max()),
                "data_misfit": float(np.linalg.norm(residual)),
                "innovation_norm": float(np.linalg.norm(innovation)),
                "predictive_condition": self.condition_number,
            },
        )
