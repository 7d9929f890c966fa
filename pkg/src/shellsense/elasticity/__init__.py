"""Linear-elastic FEM forward model and observation operators."""
from .material import STEEL, ElasticityError, Material, lame_parameters
from .operators import (
    LoadOperator,
    ObservationOperator,
    StrainObserver,
    assemble_strain_observer,
    assemble_surface_load,
    build_observation_operator,
    build_observation_operator_direct,
    gauge_strains,
    locate_points,
    solve_forward,
)
from .stiffness import (
    StiffnessSystem,
    assemble_stiffness,
    element_gradients,
    rigid_body_modes,
)

__all__ = [
    "STEEL", "ElasticityError", "Material", "lame_parameters",
    "LoadOperator", "ObservationOperator", "StrainObserver",
    "assemble_strain_observer", "assemble_surface_load",
    "build_observation_operator", "build_observation_operator_direct",
    "gauge_strains", "locate_points", "solve_forward",
    "StiffnessSystem", "assemble_stiffness", "element_gradients",
    "rigid_body_modes",
]
