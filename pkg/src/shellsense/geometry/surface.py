"""Load-surface selection and the local surface coordinate frame.

The inference band is a set of exterior nodes selected by axial depth
below the shell top. At every such node the local frame is (outward
horizontal normal, horizontal tangent positive clockwise seen from
above, vertical tangent pointing up); flange nodes inherit the frame of
the barrel at the same meridional angle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cylinder import GeometryError, LOADABLE_TAGS, Mesh


@dataclass(frozen=True)
class SurfacePatch:
    """Exterior nodes carrying inferred surface loads.

    ``node_ids`` is sorted and duplicate-free; ``z_top < z_bottom`` are
    depths below the shell top bounding the band.
    """

    name: str
    node_ids: np.ndarray
    z_top: float
    z_bottom: float

    def __post_init__(self):
        self.node_ids.setflags(write=False)

    def __len__(self) -> int:
        return self.node_ids.shape[0]


@dataclass(frozen=True)
class Frame:
    """Orthonormal surface frame at a barrel node."""

    n_hat: np.ndarray
    t_h: np.ndarray
    t_v: np.ndarray


def tag_load_surface(mesh: Mesh, z_top: float, z_bottom: float,
                     name: str = "load_band") -> SurfacePatch:
    """Select exterior loadable nodes with depth in [z_top, z_bottom].

    Depths are measured downward from the shell top. Nodes on barrel and
    flange facets qualify; cap plates never do. Raises GeometryError if
    the band selects no nodes.
    """
    if not z_top < z_bottom:
        raise GeometryError(f"need z_top < z_bottom, got [{z_top}, {z_bottom}]")
    candidates = np.unique(mesh.tris_with_tag(*LOADABLE_TAGS))
    depth = mesh.depth_from_top(candidates)
    tol = 1e-9 * mesh.height
    keep = (depth >= z_top - tol) & (depth <= z_bottom + tol)
    node_ids = np.sort(candidates[keep])
    if node_ids.size == 0:
        raise GeometryError(
            f"load band [{z_top}, {z_bottom}] m below the top selects no "
            f"exterior nodes (shell height {mesh.height:.4g} m)"
        )
    return SurfacePatch(name=name, node_ids=node_ids,
                        z_top=z_top, z_bottom=z_bottom)


def surface_frame(mesh: Mesh, node_id: int) -> Frame:
    """Local (normal, horizontal, vertical) frame at an exterior node.

    Valid for barrel and flange nodes, where the outward normal is
    horizontal by convention; raises GeometryError for cap or axis nodes.
    """
    exterior = np.unique(mesh.tris_with_tag(*LOADABLE_TAGS))
    if node_id not in exterior:
        raise GeometryError(
            f"node {node_id} is not on the barrel or flange exterior; "
            "its surface normal is not horizontal"
        )
    x, y = mesh.nodes[node_id, :2]
    r = math.hypot(x, y)
    if r < 1e-12:
        raise GeometryError(f"node {node_id} lies on the axis")
    n_hat = np.array([x / r, y / r, 0.0])
    t_h = np.array([n_hat[1], -n_hat[0], 0.0])  # clockwise seen from above
    t_v = np.array([0.0, 0.0, 1.0])
    return Frame(n_hat=n_hat, t_h=t_h, t_v=t_v)


def frame_columns(mesh: Mesh, node_ids: np.ndarray) -> np.ndarray:
    """Per-node rotation blocks mapping (N, H, V) loads to Cartesian.

    Returns (n, 3, 3) where block [:, :, 0] is the normal column -n_hat
    (positive normal pressure pushes inward), [:, :, 1] the horizontal
    tangent, and [:, :, 2] the vertical tangent. Nodes without a defined
    meridional angle (on the axis) get zero normal/horizontal columns.
    """
    xy = mesh.nodes[node_ids, :2]
    r = np.hypot(xy[:, 0], xy[:, 1])
    safe = np.where(r > 1e-12, r, 1.0)
    cos_t = np.where(r > 1e-12, xy[:, 0] / safe, 0.0)
    sin_t = np.where(r > 1e-12, xy[:, 1] / safe, 0.0)
    blocks = np.zeros((node_ids.shape[0], 3, 3))
    blocks[:, 0, 0] = -cos_t
    blocks[:, 1, 0] = -sin_t
    blocks[:, 0, 1] = sin_t
    blocks[:, 1, 1] = -cos_t
    blocks[:, 2, 2] = 1.0
    return blocks
