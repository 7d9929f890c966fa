"""Self-check suites: analytic, algebraic, and oracle-equivalence checks.

Each check returns a measured value against its threshold so reports can
show actual margins. The fault-injection flag flips the sign of the
normal load column, which must make the thin-wall check fail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .config import RunConfig
from .elasticity.material import Material
from .elasticity.operators import (
    assemble_strain_observer,
    assemble_surface_load,
    build_observation_operator,
    build_observation_operator_direct,
    gauge_strains,
    solve_forward,
)
from .elasticity.stiffness import assemble_stiffness
from .geometry.cylinder import CylinderSpec, EXTERIOR_TAGS, generate_cylinder_mesh
from .geometry.gauges import GaugeLayoutConfig, gauge_locations
from .geometry.surface import SurfacePatch, tag_load_surface
from .inference import ObservationSet, condition
from .prior import KernelConfig, assemble_prior, kernel_gram, periodic_kernel


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: measured {self.measured:.3e} "
                f"(threshold {self.threshold:.3e}) {self.detail}".rstrip())


def check_rigid_modes(system) -> CheckResult:
    residual = np.abs(system.matrix @ system.rigid_modes).max()
    scale = np.abs(system.matrix.data).max()
    return CheckResult("rigid-body modes annihilated", residual < 1e-9 * scale,
                       residual / scale, 1e-9)


def check_closed_surface_equilibrium(mesh) -> CheckResult:
    nodes = np.unique(mesh.tris_with_tag(*EXTERIOR_TAGS))
    closed = SurfacePatch(name="closed_exterior", node_ids=nodes,
                          z_top=0.0, z_bottom=mesh.height)
    loads = assemble_surface_load(mesh, closed)
    n = len(closed)
    p = np.zeros(3 * n)
    p[:n] = 1.0e6
    net = (loads.matrix @ p).reshape(-1, 3).sum(axis=0)
    tag_ok = np.array([t in EXTERIOR_TAGS for t in mesh.surface_tags])
    tri = mesh.surface_tris[tag_ok]
    q = mesh.nodes[tri]
    area = 0.5 * np.linalg.norm(
        np.cross(q[:, 1] - q[:, 0], q[:, 2] - q[:, 0]), axis=1).sum()
    rel = float(np.linalg.norm(net) / (1.0e6 * area))
    return CheckResult("closed-surface load equilibrium", rel < 1e-10, rel, 1e-10)


def check_thin_wall(mesh, spec: CylinderSpec, material: Material,
                    system, flip_normal_sign: bool = False) -> CheckResult:
    patch = tag_load_surface(mesh, 0.0, spec.height)
    loads = assemble_surface_load(mesh, patch,
                                  flip_normal_sign=flip_normal_sign)
    n = len(patch)
    pressure = 1.0e6
    p = np.zeros(3 * n)
    p[:n] = pressure
    d = solve_forward(system, loads, p)
    layout = GaugeLayoutConfig(ring_depths=(spec.height / 2.0,),
                               ring_names=("mid",), dead=())
    observer = assemble_strain_observer(mesh, gauge_locations(spec, layout))
    eps = gauge_strains(observer, d)
    hoop = np.array([e for gid, e in zip(observer.gauge_ids, eps)
                     if gid.endswith("_h")])
    r_mid = spec.outer_radius - spec.wall_thickness / 2.0
    expected = -pressure * r_mid / (spec.wall_thickness
                                    * material.youngs_modulus)
    rel = float(np.abs((hoop - expected) / expected).max())
    return CheckResult("thin-wall hoop strain vs analytic", rel < 0.05, rel,
                       0.05, f"(analytic {expected:.4e})")


def check_kernel_psd(mesh, patch, kernel: KernelConfig) -> CheckResult:
    theta = mesh.node_angles(patch.node_ids)
    z = mesh.nodes[patch.node_ids, 2]
    gram = kernel_gram(theta, z, kernel)
    min_eig = float(sla.eigvalsh(gram, subset_by_index=[0, 0])[0])
    sigma2 = kernel.sigma ** 2
    return CheckResult("kernel Gram positive semidefinite",
                       min_eig >= -1e-10 * sigma2, min_eig / sigma2, -1e-10)


def check_periodicity(kernel: KernelConfig) -> CheckResult:
    # dyadic angles: theta + 2*pi is exactly representable, so wrapped
    # evaluation must be bit-identical
    two_pi = 2.0 * math.pi
    angles = np.array([0.0, 0.25, 0.5, 1.25, 2.75, 3.0, 5.5])
    base = periodic_kernel(angles, 0.25, kernel.meridional_lengthscale)
    shifted = periodic_kernel(angles + two_pi, 0.25,
                              kernel.meridional_lengthscale)
    diff = float(np.abs(base - shifted).max())
    return CheckResult("meridional kernel exactly periodic", diff == 0.0,
                       diff, 0.0)


def check_linearity(observation, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    n = observation.matrix.shape[1]
    p = rng.standard_normal(n)
    q = rng.standard_normal(n)
    alpha, beta = 1.7, -0.4
    lhs = observation.matrix @ (alpha * p + beta * q)
    rhs = alpha * (observation.matrix @ p) + beta * (observation.matrix @ q)
    scale = np.abs(lhs).max()
    rel = float(np.abs(lhs - rhs).max() / scale)
    return CheckResult("forward-chain linearity", rel < 1e-12, rel, 1e-12)


def check_variance_reduction(bundle_prior, observation,
                             noise_std: float) -> CheckResult:
    obs = ObservationSet(
        strains=np.zeros(observation.matrix.shape[0]), noise_std=noise_std)
    post = condition(bundle_prior, observation, obs, full_cov=False)
    slack = 1e-12 * bundle_prior.blocks[0][0, 0]
    excess = float((post.variances - bundle_prior.variances()).max())
    return CheckResult("elementwise posterior-variance reduction",
                       excess <= slack, excess, slack)


def _tiny_setup():
    spec = CylinderSpec(outer_radius=0.2, wall_thickness=0.02, height=0.4,
                        flange_width=0.0, angular_resolution=6,
                        vertical_resolution=4)
    mesh = generate_cylinder_mesh(spec)
    material = Material(youngs_modulus=10e9, poisson_ratio=0.3)
    system = assemble_stiffness(mesh, material)
    patch = tag_load_surface(mesh, 0.1, 0.3)
    loads = assemble_surface_load(mesh, patch)
    layout = GaugeLayoutConfig(ring_depths=(0.2,), ring_names=("mid",),
                               angular_interval=math.pi / 2.0, dead=())
    observer = assemble_strain_observer(mesh, gauge_locations(spec, layout))
    return mesh, system, patch, loads, observer


def check_adjoint_vs_direct() -> CheckResult:
    mesh, system, patch, loads, observer = _tiny_setup()
    adj = build_observation_operator(system, observer, loads).matrix
    direct = build_observation_operator_direct(system, observer, loads).matrix
    scale = np.abs(direct).max()
    rel = float(np.abs(adj - direct).max() / scale)
    detail = f"(mesh {mesh.dof_count} DOFs)"
    return CheckResult("adjoint vs direct observation operator", rel < 1e-10,
                       rel, 1e-10, detail)


def information_form_posterior(prior, h: np.ndarray, strains: np.ndarray,
                               noise_std: float):
    """Dense regularized-least-squares posterior (verification oracle)."""
    cov_prior = sla.block_diag(*(prior.effective_block(i) for i in range(3)))
    precision = np.linalg.inv(cov_prior) + (h.T @ h) / noise_std ** 2
    cov = np.linalg.inv(precision)
    cov = 0.5 * (cov + cov.T)
    mean = cov @ (np.linalg.solve(cov_prior, prior.mean)
                  + h.T @ strains / noise_std ** 2)
    return mean, cov


def check_kalman_vs_information(seed: int = 0, rounds: int = 5) -> CheckResult:
    from .inference import condition as _condition
    from .elasticity.operators import ObservationOperator

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(rounds):
        n = int(rng.integers(5, 15))
        m = int(rng.integers(6, 13))
        theta = rng.uniform(0.0, 2.0 * math.pi, n)
        z = rng.uniform(0.0, 0.5, n)
        kernel = KernelConfig(sigma=2e6, meridional_lengthscale=0.4,
                              vertical_lengthscale=0.3)
        from .prior import BlockGaussian
        blocks = tuple(kernel_gram(theta, z, kernel) for _ in range(3))
        prior = BlockGaussian(mean=rng.normal(0.0, 1e5, 3 * n), blocks=blocks)
        h = rng.standard_normal((m, 3 * n)) * 1e-4
        eps = rng.standard_normal(m) * 1e-3
        noise = 10 ** rng.uniform(-6, -4)
        op = ObservationOperator(matrix=h, gauge_ids=tuple(
            f"g{i}" for i in range(m)), patch=None)
        post = _condition(prior, op, ObservationSet(strains=eps,
                                                    noise_std=noise))
        mean_o, cov_o = information_form_posterior(prior, h, eps, noise)
        rel_mean = np.abs(post.mean - mean_o).max() / np.abs(mean_o).max()
        rel_cov = np.abs(post.covariance - cov_o).max() / np.abs(cov_o).max()
        worst = max(worst, float(rel_mean), float(rel_cov))
    return CheckResult("Kalman form vs information form", worst < 1e-8,
                       worst, 1e-8, f"({rounds} random instances)")


def run_validation(config: RunConfig,
                   flip_normal_sign: bool = False) -> list:
    """Run every suite against *config*; returns CheckResult list."""
    spec = config.geometry
    mesh = generate_cylinder_mesh(spec)
    system = assemble_stiffness(mesh, config.material,
                                constraint=config.constraint)
    patch = tag_load_surface(mesh, config.band_top, config.band_bottom)
    gauges = gauge_locations(spec, config.gauges)
    observer = assemble_strain_observer(mesh, gauges)
    loads = assemble_surface_load(mesh, patch)
    observation = build_observation_operator(system, observer, loads)
    prior = assemble_prior(mesh, patch, *config.kernel_configs(),
                           means=config.prior_means)
    return [
        check_rigid_modes(system),
        check_closed_surface_equilibrium(mesh),
        check_thin_wall(mesh, spec, config.material, system,
                        flip_normal_sign=flip_normal_sign),
        check_kernel_psd(mesh, patch, config.prior_normal),
        check_periodicity(config.prior_normal),
        check_linearity(observation),
        check_variance_reduction(prior, observation, config.noise_std),
        check_adjoint_vs_direct(),
        check_kalman_vs_information(),
    ]
