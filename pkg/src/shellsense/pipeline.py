"""Model assembly from a RunConfig: mesh, operators, prior in one bundle."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .elasticity.material import Material
from .elasticity.operators import (
    LoadOperator,
    ObservationOperator,
    StrainObserver,
    assemble_strain_observer,
    assemble_surface_load,
    build_observation_operator,
)
from .elasticity.stiffness import StiffnessSystem, assemble_stiffness
from .geometry.cylinder import Mesh, generate_cylinder_mesh
from .geometry.gauges import GaugeSet, gauge_locations
from .geometry.mesh_file import load_mesh
from .geometry.surface import SurfacePatch, tag_load_surface
from .prior import BlockGaussian, assemble_prior

logger = logging.getLogger(__name__)


@dataclass
class ModelBundle:
    """Everything needed to run inference for one configuration."""

    config: RunConfig
    mesh: Mesh
    patch: SurfacePatch
    gauges: GaugeSet
    material: Material
    system: StiffnessSystem
    observer: StrainObserver
    loads: LoadOperator
    observation: ObservationOperator
    prior: BlockGaussian


def build_mesh(config: RunConfig) -> Mesh:
    """Load the cached mesh when configured and present, else generate."""
    if config.mesh_path and Path(config.mesh_path).exists():
        logger.info("loading mesh from %s", config.mesh_path)
        return load_mesh(config.mesh_path)
    return generate_cylinder_mesh(config.geometry)


def build_model(config: RunConfig, flip_normal_sign: bool = False) -> ModelBundle:
    """Assemble the full forward chain and prior for *config*.

    ``flip_normal_sign`` is a fault-injection hook for validation runs.
    """
    mesh = build_mesh(config)
    patch = tag_load_surface(mesh, config.band_top, config.band_bottom)
    gauges = gauge_locations(config.geometry, config.gauges)
    system = assemble_stiffness(mesh, config.material,
                                constraint=config.constraint)
    observer = assemble_strain_observer(mesh, gauges)
    loads = assemble_surface_load(mesh, patch,
                                  flip_normal_sign=flip_normal_sign)
    observation = build_observation_operator(system, observer, loads)
    prior = assemble_prior(mesh, patch, *config.kernel_configs(),
                           means=config.prior_means)
    return ModelBundle(
        config=config, mesh=mesh, patch=patch, gauges=gauges,
        material=config.material, system=system, observer=observer,
        loads=loads, observation=observation, prior=prior,
    )
