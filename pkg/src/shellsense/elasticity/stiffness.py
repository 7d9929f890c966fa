"""Global stiffness assembly and singular-system solves.

Linear (constant-strain) tetrahedra. The traction-only problem leaves
the stiffness matrix with a six-dimensional rigid-body nullspace; the
default solver works in the orthogonal complement of those modes via an
augmented (bordered) factorization, which avoids the artificial stresses
a pinned-node treatment would introduce. A pin-node mode is available
for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..geometry.cylinder import Mesh
from .material import ElasticityError, Material


def element_gradients(mesh: Mesh):
    """Shape-function gradients and volumes for every tetrahedron.

    Returns (grads, volumes) with grads of shape (m, 4, 3): row a is the
    gradient of the barycentric basis function of local node a. Raises
    ElasticityError naming the first inverted element.
    """
    coords = mesh.nodes[mesh.tets]
    edges = coords[:, 1:] - coords[:, :1]
    volumes = np.linalg.det(edges) / 6.0
    if np.any(volumes <= 0):
        bad = int(np.argmin(volumes))
        raise ElasticityError(
            f"inverted or degenerate element {bad} "
            f"(signed volume {volumes[bad]:.3e})"
        )
    inv_edges = np.linalg.inv(edges)
    grads = np.empty((mesh.tets.shape[0], 4, 3))
    grads[:, 1:, :] = np.transpose(inv_edges, (0, 2, 1))
    grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
    return grads, volumes


def strain_displacement_matrices(grads: np.ndarray) -> np.ndarray:
    """Per-element (6, 12) operators taking nodal displacements to the
    engineering-strain vector (exx, eyy, ezz, gxy, gyz, gzx)."""
    m = grads.shape[0]
    b = np.zeros((m, 6, 12))
    for a in range(4):
        gx, gy, gz = grads[:, a, 0], grads[:, a, 1], grads[:, a, 2]
        col = 3 * a
        b[:, 0, col] = gx
        b[:, 1, col + 1] = gy
        b[:, 2, col + 2] = gz
        b[:, 3, col] = gy
        b[:, 3, col + 1] = gx
        b[:, 4, col + 1] = gz
        b[:, 4, col + 2] = gy
        b[:, 5, col] = gz
        b[:, 5, col + 2] = gx
    return b


def isotropic_stiffness_voigt(mat: Material) -> np.ndarray:
    mu, lam = mat.lame_mu, mat.lame_lambda
    c = np.zeros((6, 6))
    c[:3, :3] = lam
    c[np.arange(3), np.arange(3)] += 2.0 * mu
    c[np.arange(3, 6), np.arange(3, 6)] = mu
    return c


def rigid_body_modes(mesh: Mesh) -> np.ndarray:
    """Orthonormal basis of the six rigid translations and rotations."""
    rel = mesh.nodes - mesh.nodes.mean(axis=0)
    n = mesh.dof_count
    modes = np.zeros((n, 6))
    modes[0::3, 0] = 1.0
    modes[1::3, 1] = 1.0
    modes[2::3, 2] = 1.0
    modes[1::3, 3] = -rel[:, 2]
    modes[2::3, 3] = rel[:, 1]
    modes[0::3, 4] = rel[:, 2]
    modes[2::3, 4] = -rel[:, 0]
    modes[0::3, 5] = -rel[:, 1]
    modes[1::3, 5] = rel[:, 0]
    q, _ = np.linalg.qr(modes)
    return q


@dataclass
class StiffnessSystem:
    """Factorized stiffness with rigid-body handling.

    ``solve`` accepts one right-hand side or a stack of them, projects
    out the rigid-body content, and returns displacements orthogonal to
    the rigid modes (deflate mode) or with pinned nodes held (pin mode).
    """

    matrix: sp.csr_matrix
    rigid_modes: np.ndarray
    constraint: str = "deflate"
    _lu: spla.SuperLU = field(default=None, repr=False)
    _free: np.ndarray = field(default=None, repr=False)

    @property
    def dof_count(self) -> int:
        return self.matrix.shape[0]

    def project_forces(self, f: np.ndarray) -> np.ndarray:
        """Remove net force and torque (rigid-mode content) from loads."""
        r = self.rigid_modes
        return f - r @ (r.T @ f)

    def solve(self, f: np.ndarray) -> np.ndarray:
        """Displacements for nodal forces *f* ((n,) or (n, k))."""
        f = np.asarray(f, dtype=float)
        if not np.all(np.isfinite(f)):
            raise ElasticityError("non-finite entries in force vector")
        single = f.ndim == 1
        fs = f[:, None] if single else f
        n = self.dof_count
        if self.constraint == "deflate":
            rhs = np.vstack([fs, np.zeros((6, fs.shape[1]))])
            sol = self._lu.solve(rhs)[:n]
        else:
            sol = np.zeros_like(fs)
            sol[self._free] = self._lu.solve(fs[self._free])
        return sol[:, 0] if single else sol


def assemble_stiffness(mesh: Mesh, mat: Material,
                       constraint: str = "deflate") -> StiffnessSystem:
    """Assemble and factorize the global stiffness system."""
    if constraint not in ("deflate", "pin"):
        raise ElasticityError(f"unknown constraint mode {constraint!r}")
    grads, volumes = element_gradients(mesh)
    b = strain_displacement_matrices(grads)
    c = isotropic_stiffness_voigt(mat)
    ke = np.einsum("e,eki,kl,elj->eij", volumes, b, c, b, optimize=True)

    dofs = (3 * mesh.tets[:, :, None] + np.arange(3)).reshape(-1, 12)
    rows = np.repeat(dofs, 12, axis=1).ravel()
    cols = np.tile(dofs, (1, 12)).ravel()
    n = mesh.dof_count
    k = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    k = (k + k.T) * 0.5

    modes = rigid_body_modes(mesh)
    if constraint == "deflate":
        aug = sp.bmat([[k, sp.csc_matrix(modes)],
                       [sp.csc_matrix(modes.T), None]], format="csc")
        lu = spla.splu(aug)
        return StiffnessSystem(matrix=k, rigid_modes=modes,
                               constraint=constraint, _lu=lu)
    free = np.ones(n, dtype=bool)
    free[_pin_dofs(mesh)] = False
    lu = spla.splu(k[free][:, free].tocsc())
    return StiffnessSystem(matrix=k, rigid_modes=modes,
                           constraint=constraint, _lu=lu, _free=free)


def _pin_dofs(mesh: Mesh) -> np.ndarray:
    """Three well-separated nodes, all DOFs held (comparison mode only)."""
    pts = mesh.nodes
    first = int(np.argmax(pts[:, 0]))
    second = int(np.argmax(np.linalg.norm(pts - pts[first], axis=1)))
    d = np.minimum(np.linalg.norm(pts - pts[first], axis=1),
                   np.linalg.norm(pts - pts[second], axis=1))
    third = int(np.argmax(d))
    picked = np.array([first, second, third])
    return (3 * picked[:, None] + np.arange(3)).ravel()
