"""Strain observer, surface-load operator, and the strain/load map.

The observer turns nodal displacements into directional strains at the
gauge points, each read from the single element containing the gauge.
The load operator turns nodal (normal, horizontal, vertical) surface
pressures on the load patch into consistent global nodal forces using
exact linear-triangle quadrature. Composing both through the stiffness
inverse gives the dense observation operator, built with one adjoint
solve per gauge since gauges are far fewer than pressure unknowns.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..geometry.cylinder import EXTERIOR_TAGS, Mesh
from ..geometry.gauges import GaugeSet
from ..geometry.surface import SurfacePatch, frame_columns
from .material import ElasticityError
from .stiffness import (
    StiffnessSystem,
    element_gradients,
    strain_displacement_matrices,
)

_TRI_MASS = (np.full((3, 3), 1.0) + np.eye(3)) / 12.0


@dataclass(frozen=True)
class StrainObserver:
    """Sparse map from nodal displacements to live-gauge strains."""

    matrix: sp.csr_matrix
    gauge_ids: tuple
    containing_tets: np.ndarray

    @property
    def gauge_count(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class LoadOperator:
    """Sparse map from patch pressures (N, H, V blocks) to nodal forces."""

    matrix: sp.csr_matrix
    patch: SurfacePatch

    @property
    def pressure_dof_count(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class ObservationOperator:
    """Dense map from patch pressures to predicted gauge strains."""

    matrix: np.ndarray
    gauge_ids: tuple
    patch: SurfacePatch

    def __post_init__(self):
        if not np.all(np.isfinite(self.matrix)):
            raise ElasticityError("observation operator has non-finite entries")

    def predict(self, pressures: np.ndarray) -> np.ndarray:
        return self.matrix @ pressures


def locate_points(mesh: Mesh, points: np.ndarray, tol: float = 1e-8):
    """Containing tetrahedron and barycentric margin for each point.

    Picks the element with the largest minimum barycentric coordinate;
    a point is considered outside when that margin is below -tol.
    """
    grads, _ = element_gradients(mesh)
    x0 = mesh.nodes[mesh.tets[:, 0]]
    d = points[None, :, :] - x0[:, None, :]
    lam = np.einsum("maj,mpj->mpa", grads[:, 1:, :], d)
    lam0 = 1.0 - lam.sum(axis=2)
    min_bary = np.minimum(lam.min(axis=2), lam0)
    best = np.argmax(min_bary, axis=0)
    margins = min_bary[best, np.arange(points.shape[0])]
    return best, margins, tol


def assemble_strain_observer(mesh: Mesh, gauges: GaugeSet,
                             tol: float = 1e-8) -> StrainObserver:
    """One observer row per live gauge.

    Each row evaluates the symmetric displacement gradient of the
    containing element along the gauge direction. Raises ElasticityError
    with the gauge id when a gauge lies outside the mesh.
    """
    live = gauges.live
    if not live:
        raise ElasticityError("gauge set has no live gauges")
    points = np.array([g.position for g in live])
    tets, margins, tol = locate_points(mesh, points, tol)
    outside = margins < -tol
    if np.any(outside):
        bad = live[int(np.argmin(margins))]
        raise ElasticityError(
            f"gauge {bad.gauge_id!r} lies outside the mesh "
            f"(barycentric margin {margins.min():.2e})"
        )
    grads, _ = element_gradients(mesh)
    b = strain_displacement_matrices(grads)
    rows, cols, vals = [], [], []
    for i, gauge in enumerate(live):
        t = gauge.direction_vector()
        w6 = np.array([t[0] ** 2, t[1] ** 2, t[2] ** 2,
                       t[0] * t[1], t[1] * t[2], t[2] * t[0]])
        row = w6 @ b[tets[i]]
        dofs = (3 * mesh.tets[tets[i], :, None] + np.arange(3)).ravel()
        rows.extend([i] * 12)
        cols.extend(dofs)
        vals.extend(row)
    matrix = sp.csr_matrix((vals, (rows, cols)),
                           shape=(len(live), mesh.dof_count))
    return StrainObserver(matrix=matrix,
                          gauge_ids=tuple(g.gauge_id for g in live),
                          containing_tets=np.asarray(tets))


def assemble_surface_load(mesh: Mesh, patch: SurfacePatch,
                          flip_normal_sign: bool = False) -> LoadOperator:
    """Consistent nodal forces from nodal patch pressures.

    Integrates the piecewise-linear traction over exterior facets whose
    three nodes all belong to the patch, so the load support has a hard
    edge at the patch boundary. Column blocks are ordered (all N, all H,
    all V); the normal column is -n_hat, so positive normal pressure
    pushes inward. ``flip_normal_sign`` inverts that column; it exists
    only as a fault-injection hook for validation runs.
    """
    n_patch = len(patch)
    local = np.full(mesh.node_count, -1, dtype=np.int64)
    local[patch.node_ids] = np.arange(n_patch)

    tag_ok = np.array([t in EXTERIOR_TAGS for t in mesh.surface_tags])
    tris = mesh.surface_tris[tag_ok]
    in_patch = (local[tris] >= 0).all(axis=1)
    tris = tris[in_patch]
    if tris.shape[0] == 0:
        raise ElasticityError("no exterior facet lies fully inside the patch")
    covered = np.zeros(n_patch, dtype=bool)
    covered[local[tris].ravel()] = True
    if not covered.all():
        orphan = patch.node_ids[np.where(~covered)[0][0]]
        raise ElasticityError(
            f"patch node {orphan} has no fully-covered adjacent surface facet"
        )

    p = mesh.nodes[tris]
    areas = 0.5 * np.linalg.norm(
        np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1
    )
    blocks = frame_columns(mesh, patch.node_ids)  # (n_patch, 3, 3)
    if flip_normal_sign:
        blocks = blocks.copy()
        blocks[:, :, 0] *= -1.0

    rows, cols, vals = [], [], []
    tris_local = local[tris]
    for a in range(3):
        ga = tris[:, a]
        for bnode in range(3):
            coeff = areas * _TRI_MASS[a, bnode]
            lb = tris_local[:, bnode]
            for c in range(3):
                for comp in range(3):
                    v = coeff * blocks[lb, c, comp]
                    rows.append(3 * ga + c)
                    cols.append(comp * n_patch + lb)
                    vals.append(v)
    matrix = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mesh.dof_count, 3 * n_patch),
    )
    return LoadOperator(matrix=matrix, patch=patch)


def build_observation_operator(system: StiffnessSystem,
                               observer: StrainObserver,
                               loads: LoadOperator) -> ObservationOperator:
    """Dense pressure-to-strain map via one adjoint solve per gauge.

    Exploits the symmetry of the elastic operator: each observer row is
    solved against the stiffness once and dotted with every load column,
    which matches the column-by-column forward construction to rounding.
    """
    if observer.matrix.shape[1] != system.dof_count:
        raise ElasticityError("observer/stiffness dimension mismatch")
    if loads.matrix.shape[0] != system.dof_count:
        raise ElasticityError("load/stiffness dimension mismatch")
    rhs = observer.matrix.toarray().T  # (n_dofs, n_gauges)
    w = system.solve(rhs)
    h = (loads.matrix.T @ w).T
    return ObservationOperator(matrix=np.ascontiguousarray(h),
                               gauge_ids=observer.gauge_ids,
                               patch=loads.patch)


def build_observation_operator_direct(system: StiffnessSystem,
                                      observer: StrainObserver,
                                      loads: LoadOperator) -> ObservationOperator:
    """Column-by-column forward construction (verification oracle)."""
    n_cols = loads.pressure_dof_count
    h = np.empty((observer.gauge_count, n_cols))
    for j in range(n_cols):
        e = np.zeros(n_cols)
        e[j] = 1.0
        d = system.solve(loads.matrix @ e)
        h[:, j] = observer.matrix @ d
    return ObservationOperator(matrix=h, gauge_ids=observer.gauge_ids,
                               patch=loads.patch)


def solve_forward(system: StiffnessSystem, loads: LoadOperator,
                  pressures: np.ndarray) -> np.ndarray:
    """Displacement field for nodal patch pressures."""
    pressures = np.asarray(pressures, dtype=float)
    if not np.all(np.isfinite(pressures)):
        raise ElasticityError("non-finite entries in pressure vector")
    return system.solve(loads.matrix @ pressures)


def gauge_strains(observer: StrainObserver,
                  displacements: np.ndarray) -> np.ndarray:
    """Directional strains read off a displacement field."""
    return observer.matrix @ displacements
