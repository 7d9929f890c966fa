"""Shell geometry: mesh generation, load surface, gauges, persistence."""
from .cylinder import (
    BARREL_INNER,
    BARREL_OUTER,
    CAP_BOTTOM,
    CAP_BOTTOM_INNER,
    CAP_TOP,
    CAP_TOP_INNER,
    CylinderSpec,
    EXTERIOR_TAGS,
    FLANGE_BOTTOM,
    FLANGE_OUTER,
    FLANGE_TOP,
    GeometryError,
    LOADABLE_TAGS,
    Mesh,
    generate_cylinder_mesh,
    mesh_volume,
    tet_volumes,
)
from .gauges import (
    DEFAULT_DEAD,
    DEFAULT_RING_DEPTHS,
    Gauge,
    GaugeLayoutConfig,
    GaugeSet,
    gauge_locations,
)
from .mesh_file import MeshFormatError, load_mesh, save_mesh
from .surface import Frame, SurfacePatch, frame_columns, surface_frame, tag_load_surface

__all__ = [
    "BARREL_INNER", "BARREL_OUTER", "CAP_BOTTOM", "CAP_BOTTOM_INNER",
    "CAP_TOP", "CAP_TOP_INNER", "CylinderSpec", "EXTERIOR_TAGS",
    "FLANGE_BOTTOM", "FLANGE_OUTER", "FLANGE_TOP", "GeometryError",
    "LOADABLE_TAGS", "Mesh", "generate_cylinder_mesh", "mesh_volume",
    "tet_volumes", "DEFAULT_DEAD", "DEFAULT_RING_DEPTHS", "Gauge",
    "GaugeLayoutConfig", "GaugeSet", "gauge_locations", "MeshFormatError",
    "load_mesh", "save_mesh", "Frame", "SurfacePatch", "frame_columns",
    "surface_frame", "tag_load_surface",
]
