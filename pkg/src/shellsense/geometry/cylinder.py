"""Tetrahedral mesh generation for a capped cylindrical shell.

The solid is built by revolving a masked (r, z) cross-section grid around
the z axis: the barrel wall, one-cell-thick end caps, and an optional
annular flange ring that protrudes outward at a configurable distance
below the top. Cross-section cells are triangulated and each triangle is
swept through one angular step into a prism, pyramid, or tetrahedron,
which is then subdivided into tetrahedra.

Conventions:
- Internal coordinates are right-handed with z pointing up; the shell
  bottom sits at z = 0 and the top at z = height.
- "Depth" values (gauge rings, load bands, flange offset) are measured
  downward from the top, matching the file-format convention.
- Swept-quad diagonals follow a per-slab orientation rule. The default
  "uniform" pattern orients every slab identically, which makes the mesh
  exactly equivariant under rotation by any whole slab: every node of a
  ring sees the same local element arrangement, so assembled operators
  carry no node-scale texture and ring sums of integrated basis weights
  cancel to rounding. The "alternating" pattern flips orientation slab
  by slab, trading rotational equivariance for exact mirror symmetry
  about the x-z plane (even resolutions).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    """Invalid geometric specification or degenerate mesh input."""


# Exterior-surface region tags. Tags partition the boundary facets.
BARREL_OUTER = "barrel_outer"
BARREL_INNER = "barrel_inner"
CAP_TOP = "cap_top"
CAP_BOTTOM = "cap_bottom"
CAP_TOP_INNER = "cap_top_inner"
CAP_BOTTOM_INNER = "cap_bottom_inner"
FLANGE_TOP = "flange_top"
FLANGE_BOTTOM = "flange_bottom"
FLANGE_OUTER = "flange_outer"

#: Tags reachable from outside the shell (the closed exterior component).
EXTERIOR_TAGS = frozenset(
    {BARREL_OUTER, CAP_TOP, CAP_BOTTOM, FLANGE_TOP, FLANGE_BOTTOM, FLANGE_OUTER}
)
#: Exterior tags whose nodes may carry inferred surface loads.
LOADABLE_TAGS = frozenset(
    {BARREL_OUTER, FLANGE_TOP, FLANGE_BOTTOM, FLANGE_OUTER}
)


@dataclass(frozen=True)
class CylinderSpec:
    """Parameters of the shell geometry and mesh resolution.

    Lengths in meters. The flange is simplified to a solid annular ring
    occupying the single barrel cell row containing
    ``flange_offset_from_top``; ``flange_width = 0`` disables it. Cap
    plates occupy the outermost cell row at each end, so barrel node
    levels stay uniform.
    """

    outer_radius: float
    wall_thickness: float
    height: float
    flange_offset_from_top: float = 0.235
    angular_resolution: int = 48
    vertical_resolution: int = 24
    through_thickness_layers: int = 1
    flange_width: float = 0.04
    diagonal_pattern: str = "uniform"

    def __post_init__(self):
        if not self.outer_radius > self.wall_thickness > 0:
            raise GeometryError(
                f"need outer_radius > wall_thickness > 0, got "
                f"r={self.outer_radius}, t={self.wall_thickness}"
            )
        if self.height <= 0:
            raise GeometryError(f"height must be positive, got {self.height}")
        if not 0 <= self.flange_offset_from_top < self.height:
            raise GeometryError(
                f"flange offset {self.flange_offset_from_top} outside "
                f"[0, {self.height})"
            )
        if self.angular_resolution < 4 or self.vertical_resolution < 4:
            raise GeometryError("angular and vertical resolutions must be >= 4")
        if self.through_thickness_layers < 1:
            raise GeometryError("through_thickness_layers must be >= 1")
        if self.flange_width < 0:
            raise GeometryError("flange_width must be >= 0")
        if self.diagonal_pattern not in ("uniform", "alternating"):
            raise GeometryError(
                f"diagonal_pattern must be 'uniform' or 'alternating', "
                f"got {self.diagonal_pattern!r}"
            )

    @property
    def inner_radius(self) -> float:
        return self.outer_radius - self.wall_thickness


@dataclass(frozen=True)
class Mesh:
    """Immutable tetrahedral mesh with tagged boundary facets.

    ``nodes`` is (N, 3) float64, ``tets`` (M, 4) int32 with positive
    signed volume, ``surface_tris`` (S, 3) int32 outward-wound boundary
    facets, and ``surface_tags`` the per-facet region tag.
    """

    nodes: np.ndarray
    tets: np.ndarray
    surface_tris: np.ndarray
    surface_tags: tuple = field(repr=False)

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.tets.setflags(write=False)
        self.surface_tris.setflags(write=False)

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    @property
    def dof_count(self) -> int:
        return 3 * self.nodes.shape[0]

    @property
    def height(self) -> float:
        return float(self.nodes[:, 2].max())

    def depth_from_top(self, node_ids=None) -> np.ndarray:
        """Axial distance below the shell top for the given nodes."""
        z = self.nodes[:, 2] if node_ids is None else self.nodes[node_ids, 2]
        return self.height - z

    def node_angles(self, node_ids=None) -> np.ndarray:
        """Meridional angle atan2(y, x) in [0, 2*pi)."""
        xy = self.nodes if node_ids is None else self.nodes[node_ids]
        theta = np.arctan2(xy[:, 1], xy[:, 0])
        return np.mod(theta, 2.0 * math.pi)

    def tris_with_tag(self, *tags: str) -> np.ndarray:
        """Boundary facets whose tag is in *tags*, as an (S', 3) array."""
        mask = np.array([t in tags for t in self.surface_tags], dtype=bool)
        return self.surface_tris[mask]


def tet_volumes(nodes: np.ndarray, tets: np.ndarray) -> np.ndarray:
    """Signed volumes of each tetrahedron."""
    x = nodes[tets]
    e = x[:, 1:] - x[:, :1]
    return np.linalg.det(e) / 6.0


def mesh_volume(mesh: Mesh) -> float:
    return float(tet_volumes(mesh.nodes, mesh.tets).sum())


# Subdivision of a swept prism with bottom triangle (a0, b0, c0) at one
# angular station and top (a1, b1, c1) at the next, where a < b < c in the
# cross-section ordering. Every swept quad gets the diagonal running from
# its lower-ordered node at the first station to its higher-ordered node
# at the second, which keeps shared faces conforming between neighbours.
_PRISM_PATTERN = ((0, 1, 2, 5), (0, 1, 5, 4), (0, 4, 5, 3))


def _prism_tets(lo, hi):
    v = (*lo, *hi)
    return [tuple(v[i] for i in pat) for pat in _PRISM_PATTERN]


def _pyramid_tets(apex, b_lo, c_lo, b_hi, c_hi):
    # Base quad swept from cross-section edge (b, c) with b < c; diagonal
    # from b at the first station to c at the second.
    return [(apex, b_lo, c_lo, c_hi), (apex, b_lo, c_hi, b_hi)]


def generate_cylinder_mesh(spec: CylinderSpec) -> Mesh:
    """Build the watertight shell mesh for *spec*.

    Raises GeometryError for degenerate specifications (wall thicker than
    the radius, flange row colliding with a cap, ...).
    """
    n_theta = spec.angular_resolution
    n_vert = spec.vertical_resolution
    r_i, r_o, height = spec.inner_radius, spec.outer_radius, spec.height

    z_levels = np.linspace(0.0, height, n_vert + 1)
    arc = 2.0 * math.pi * r_o / n_theta

    # Radial breakpoints: axis -> cap rings -> inner wall -> layers ->
    # outer wall -> flange rim.
    n_cap = max(1, round(r_i / arc))
    radii = list(np.linspace(0.0, r_i, n_cap + 1))
    radii += list(np.linspace(r_i, r_o, spec.through_thickness_layers + 1)[1:])
    i_ri = n_cap
    i_ro = len(radii) - 1
    include_flange = spec.flange_width > 0
    if include_flange:
        n_fl = max(1, round(spec.flange_width / arc))
        radii += list(
            r_o + np.linspace(0.0, spec.flange_width, n_fl + 1)[1:]
        )
    radii = np.asarray(radii)

    iz_flange = -1
    if include_flange:
        z_fl = height - spec.flange_offset_from_top
        iz_flange = min(int(np.searchsorted(z_levels, z_fl, side="right")) - 1,
                        n_vert - 1)
        if not 1 <= iz_flange <= n_vert - 2:
            raise GeometryError(
                "flange row collides with an end cap; move "
                "flange_offset_from_top or refine vertical_resolution"
            )

    def cell_active(ir: int, iz: int) -> bool:
        if i_ri <= ir < i_ro:
            return True  # barrel wall spans the full height
        if ir < i_ri:
            return iz in (0, n_vert - 1)  # cap plates
        return iz == iz_flange  # flange ring

    active = [
        (ir, iz)
        for ir in range(len(radii) - 1)
        for iz in range(n_vert)
        if cell_active(ir, iz)
    ]

    # Cross-section (2D) nodes used by active cells, with a deterministic
    # ordering that fixes the swept-quad diagonal rule.
    used_2d = sorted(
        {
            corner
            for ir, iz in active
            for corner in ((ir, iz), (ir + 1, iz), (ir, iz + 1), (ir + 1, iz + 1))
        }
    )
    order_2d = {n2: i for i, n2 in enumerate(used_2d)}

    axis_ids: dict[int, int] = {}
    ring_base: dict[tuple, int] = {}
    coords = []
    for ir, iz in used_2d:
        if ir == 0:
            axis_ids[(0, iz)] = len(coords)
            coords.append((0.0, 0.0, z_levels[iz]))
    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    for ir, iz in used_2d:
        if ir > 0:
            ring_base[(ir, iz)] = len(coords)
            r, z = radii[ir], z_levels[iz]
            coords.extend(zip(r * cos_t, r * sin_t, np.full(n_theta, z)))
    nodes = np.asarray(coords, dtype=np.float64)

    # Gather axis-id lookups into the same map for uniform access.
    def nid(n2, k):
        if n2[0] == 0:
            return axis_ids[n2]
        return ring_base[n2] + (k % n_theta)

    alternating = spec.diagonal_pattern == "alternating"
    tets: list[tuple] = []
    for ir, iz in active:
        ll, lr = (ir, iz), (ir + 1, iz)
        ul, ur = (ir, iz + 1), (ir + 1, iz + 1)
        for tri in ((ll, lr, ur), (ll, ur, ul)):
            on_axis = [v for v in tri if v[0] == 0]
            off_axis = sorted((v for v in tri if v[0] > 0),
                              key=order_2d.__getitem__)
            for k in range(n_theta):
                flipped = alternating and k % 2 == 1
                lo, hi = (k + 1, k) if flipped else (k, k + 1)
                if not on_axis:
                    a, b, c = off_axis
                    tets.extend(_prism_tets(
                        (nid(a, lo), nid(b, lo), nid(c, lo)),
                        (nid(a, hi), nid(b, hi), nid(c, hi)),
                    ))
                elif len(on_axis) == 1:
                    b, c = off_axis
                    tets.extend(_pyramid_tets(
                        nid(on_axis[0], 0),
                        nid(b, lo), nid(c, lo), nid(b, hi), nid(c, hi),
                    ))
                else:
                    (b,) = off_axis
                    tets.append((nid(on_axis[0], 0), nid(on_axis[1], 0),
                                 nid(b, k), nid(b, k + 1)))

    tet_arr = np.asarray(tets, dtype=np.int32)
    vols = tet_volumes(nodes, tet_arr)
    flip = np.where(vols < 0)[0]
    tet_arr[flip] = tet_arr[flip][:, [0, 1, 3, 2]]
    vols = np.abs(vols)
    if np.any(vols <= 0):
        bad = int(np.argmin(vols))
        raise GeometryError(f"degenerate tetrahedron {bad} (zero volume)")

    tris, tags = _boundary_facets(nodes, tet_arr, spec, radii, z_levels)
    return Mesh(nodes=nodes, tets=tet_arr, surface_tris=tris,
                surface_tags=tuple(tags))


def _boundary_facets(nodes, tets, spec: CylinderSpec, radii, z_levels):
    """Extract boundary triangles (outward wound) and classify regions."""
    m = tets.shape[0]
    faces = np.empty((4 * m, 3), dtype=np.int32)
    opposite = np.empty(4 * m, dtype=np.int32)
    local = ((1, 2, 3, 0), (0, 2, 3, 1), (0, 1, 3, 2), (0, 1, 2, 3))
    for slot, (i, j, k, opp) in enumerate(local):
        faces[slot::4] = tets[:, (i, j, k)]
        opposite[slot::4] = tets[:, opp]
    key = np.sort(faces, axis=1)
    _, first, counts = np.unique(
        key, axis=0, return_index=True, return_counts=True
    )
    if np.any(counts > 2):
        raise GeometryError("non-manifold face in generated mesh")
    boundary = first[counts == 1]
    tris = faces[boundary]
    opp = opposite[boundary]

    # Wind outward: flip triangles whose normal points toward the
    # opposite vertex of the owning tet.
    p = nodes[tris]
    normal = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    inward = np.einsum("ij,ij->i", normal,
                       nodes[opp] - p[:, 0]) > 0
    tris[inward] = tris[inward][:, [0, 2, 1]]
    p = nodes[tris]
    normal = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    normal /= np.linalg.norm(normal, axis=1, keepdims=True)
    centroid = p.mean(axis=1)

    height = spec.height
    r_mid = 0.5 * (spec.inner_radius + spec.outer_radius)
    tol = 1e-9 * max(height, spec.outer_radius)
    z_cap_bot = z_levels[1]
    z_cap_top = z_levels[-2]
    rc = np.hypot(centroid[:, 0], centroid[:, 1])
    zc = centroid[:, 2]
    radial_out = (normal[:, 0] * centroid[:, 0]
                  + normal[:, 1] * centroid[:, 1]) > 0

    tags = []
    for i in range(tris.shape[0]):
        nz = normal[i, 2]
        if nz > 0.7:
            if zc[i] >= height - tol:
                tag = CAP_TOP
            elif rc[i] > r_mid:
                tag = FLANGE_TOP
            elif abs(zc[i] - z_cap_bot) <= tol:
                tag = CAP_BOTTOM_INNER
            else:
                raise GeometryError(f"unclassifiable upward facet at z={zc[i]}")
        elif nz < -0.7:
            if zc[i] <= tol:
                tag = CAP_BOTTOM
            elif rc[i] > r_mid:
                tag = FLANGE_BOTTOM
            elif abs(zc[i] - z_cap_top) <= tol:
                tag = CAP_TOP_INNER
            else:
                raise GeometryError(f"unclassifiable downward facet at z={zc[i]}")
        else:
            if not radial_out[i]:
                tag = BARREL_INNER
            elif rc[i] > spec.outer_radius + tol:
                tag = FLANGE_OUTER
            else:
                tag = BARREL_OUTER
        tags.append(tag)
    return tris, tags
