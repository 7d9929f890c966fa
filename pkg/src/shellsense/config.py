"""Run configuration: TOML parsing, strict validation, defaults echo.

Numbers are SI; strings with unit suffixes ("23.5 cm", "4 MPa",
"60 deg") are converted on load. Unknown keys are rejected with the
offending key path in the message.
"""
from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .geometry.cylinder import CylinderSpec
from .geometry.gauges import DEFAULT_DEAD, DEFAULT_RING_DEPTHS, GaugeLayoutConfig, RING_NAMES
from .elasticity.material import Material
from .prior import KernelConfig
from .units import parse_quantity


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Synthetic-truth section: patches, synthesis noise, seed, slices."""

    patches: tuple = ()
    seed: int = 0
    records: int = 1
    noise_std: float = 0.0
    slice_depths: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    geometry: CylinderSpec = field(
        default_factory=lambda: CylinderSpec(
            outer_radius=0.381, wall_thickness=0.00635, height=1.168)
    )
    gauges: GaugeLayoutConfig = field(default_factory=GaugeLayoutConfig)
    band_top: float = 0.235
    band_bottom: float = 0.835
    material: Material = field(
        default_factory=lambda: Material(youngs_modulus=200e9, poisson_ratio=0.3)
    )
    constraint: str = "deflate"
    prior_normal: KernelConfig = field(
        default_factory=lambda: KernelConfig(sigma=4.0e6))
    prior_horizontal: KernelConfig = field(
        default_factory=lambda: KernelConfig(sigma=0.5e6))
    prior_vertical: KernelConfig = field(
        default_factory=lambda: KernelConfig(sigma=0.5e6))
    prior_means: tuple = (0.0, 0.0, 0.0)
    noise_std: float = 1e-6
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    output_dir: str = "out"
    mesh_path: str | None = None
    input_csv: str | None = None

    def kernel_configs(self):
        return self.prior_normal, self.prior_horizontal, self.prior_vertical

    def resolved_dict(self) -> dict:
        """Fully-expanded configuration (all defaults made explicit)."""
        g = self.geometry
        kc = lambda k: {
            "sigma": k.sigma,
            "meridional_lengthscale": k.meridional_lengthscale,
            "vertical_lengthscale": k.vertical_lengthscale,
        }
        return {
            "geometry": {
                "outer_radius": g.outer_radius,
                "wall_thickness": g.wall_thickness,
                "height": g.height,
                "flange_offset_from_top": g.flange_offset_from_top,
                "flange_width": g.flange_width,
                "angular_resolution": g.angular_resolution,
                "vertical_resolution": g.vertical_resolution,
                "through_thickness_layers": g.through_thickness_layers,
                "diagonal_pattern": g.diagonal_pattern,
            },
            "gauges": {
                "ring_depths": list(self.gauges.ring_depths),
                "ring_names": list(self.gauges.ring_names),
                "angular_interval": self.gauges.angular_interval,
                "angular_offset": self.gauges.angular_offset,
                "dead": list(self.gauges.dead),
            },
            "surface": {
                "band_top": self.band_top,
                "band_bottom": self.band_bottom,
            },
            "material": {
                "youngs_modulus": self.material.youngs_modulus,
                "poisson_ratio": self.material.poisson_ratio,
                "constraint": self.constraint,
            },
            "prior": {
                "normal": kc(self.prior_normal),
                "horizontal": kc(self.prior_horizontal),
                "vertical": kc(self.prior_vertical),
                "means": list(self.prior_means),
            },
            "noise": {"sigma_strain": self.noise_std},
            "experiment": {
                "seed": self.experiment.seed,
                "records": self.experiment.records,
                "noise_std": self.experiment.noise_std,
                "slice_depths": list(self.experiment.slice_depths),
                "patches": [dict(p) for p in self.experiment.patches],
            },
            "paths": {
                "output_dir": self.output_dir,
                "mesh": self.mesh_path,
                "input_csv": self.input_csv,
            },
        }

    def write_resolved(self, directory) -> Path:
        path = Path(directory) / "resolved_config.json"
        path.write_text(json.dumps(self.resolved_dict(), indent=2) + "\n")
        return path


def _check_keys(table: dict, allowed, where: str):
    unknown = set(table) - set(allowed)
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in [{where}]"
        )


def _get(table: dict, key: str, kind, default):
    if key not in table:
        return default
    value = table[key]
    if kind in ("length", "pressure", "angle"):
        return parse_quantity(value, kind)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        return value
    raise AssertionError(kind)


def _kernel(table: dict, where: str, default: KernelConfig) -> KernelConfig:
    _check_keys(table, {"sigma", "meridional_lengthscale",
                        "vertical_lengthscale", "mean"}, where)
    return KernelConfig(
        sigma=_get(table, "sigma", "pressure", default.sigma),
        meridional_lengthscale=_get(table, "meridional_lengthscale", "angle",
                                    default.meridional_lengthscale),
        vertical_lengthscale=_get(table, "vertical_lengthscale", "length",
                                  default.vertical_lengthscale),
    )


def _patch_table(entry: dict, idx: int) -> dict:
    where = f"experiment.patches[{idx}]"
    _check_keys(entry, {"center_angle", "angular_width", "z_center",
                        "z_height", "magnitude", "component"}, where)
    missing = {"angular_width", "z_center", "z_height", "magnitude"} - set(entry)
    if missing:
        raise ConfigError(f"missing key(s) {sorted(missing)} in [{where}]")
    return {
        "center_angle": parse_quantity(entry.get("center_angle", 0.0), "angle"),
        "angular_width": parse_quantity(entry["angular_width"], "length"),
        "z_center": parse_quantity(entry["z_center"], "length"),
        "z_height": parse_quantity(entry["z_height"], "length"),
        "magnitude": parse_quantity(entry["magnitude"], "pressure"),
        "component": entry.get("component", "N"),
    }


def parse_config(data: dict, base_dir: Path | None = None) -> RunConfig:
    """Build a validated RunConfig from parsed TOML data."""
    defaults = RunConfig()
    _check_keys(data, {"geometry", "gauges", "surface", "material",
                       "prior", "noise", "experiment", "paths"}, "root")

    geo = data.get("geometry", {})
    _check_keys(geo, {"outer_radius", "wall_thickness", "height",
                      "flange_offset_from_top", "flange_width",
                      "angular_resolution", "vertical_resolution",
                      "through_thickness_layers", "diagonal_pattern"},
                "geometry")
    dg = defaults.geometry
    geometry = CylinderSpec(
        outer_radius=_get(geo, "outer_radius", "length", dg.outer_radius),
        wall_thickness=_get(geo, "wall_thickness", "length", dg.wall_thickness),
        height=_get(geo, "height", "length", dg.height),
        flange_offset_from_top=_get(geo, "flange_offset_from_top", "length",
                                    dg.flange_offset_from_top),
        flange_width=_get(geo, "flange_width", "length", dg.flange_width),
        angular_resolution=_get(geo, "angular_resolution", int,
                                dg.angular_resolution),
        vertical_resolution=_get(geo, "vertical_resolution", int,
                                 dg.vertical_resolution),
        through_thickness_layers=_get(geo, "through_thickness_layers", int,
                                      dg.through_thickness_layers),
        diagonal_pattern=_get(geo, "diagonal_pattern", str,
                              dg.diagonal_pattern),
    )

    ga = data.get("gauges", {})
    _check_keys(ga, {"ring_depths", "ring_names", "angular_interval",
                     "angular_offset", "dead"}, "gauges")
    depths = ga.get("ring_depths", list(DEFAULT_RING_DEPTHS))
    if not isinstance(depths, list) or not depths:
        raise ConfigError("gauges.ring_depths must be a nonempty list")
    names = ga.get("ring_names",
                   list(RING_NAMES[:len(depths)]) if len(depths) <= 3
                   else [f"r{i}" for i in range(len(depths))])
    dead = ga.get("dead", list(DEFAULT_DEAD))
    if not isinstance(dead, list):
        raise ConfigError("gauges.dead must be a list of gauge ids")
    gauges = GaugeLayoutConfig(
        ring_depths=tuple(parse_quantity(d, "length") for d in depths),
        ring_names=tuple(str(n) for n in names),
        angular_interval=parse_quantity(ga.get("angular_interval", math.pi / 3),
                                        "angle"),
        angular_offset=parse_quantity(ga.get("angular_offset", 0.0), "angle"),
        dead=tuple(str(d) for d in dead),
    )

    surf = data.get("surface", {})
    _check_keys(surf, {"band_top", "band_bottom"}, "surface")
    band_top = _get(surf, "band_top", "length", defaults.band_top)
    band_bottom = _get(surf, "band_bottom", "length", defaults.band_bottom)

    matt = data.get("material", {})
    _check_keys(matt, {"youngs_modulus", "poisson_ratio", "constraint"},
                "material")
    material = Material(
        youngs_modulus=_get(matt, "youngs_modulus", "pressure",
                            defaults.material.youngs_modulus),
        poisson_ratio=_get(matt, "poisson_ratio", float,
                           defaults.material.poisson_ratio),
    )
    constraint = _get(matt, "constraint", str, defaults.constraint)
    if constraint not in ("deflate", "pin"):
        raise ConfigError(f"material.constraint must be deflate|pin, "
                          f"got {constraint!r}")

    pr = data.get("prior", {})
    _check_keys(pr, {"normal", "horizontal", "vertical", "means"}, "prior")
    prior_n = _kernel(pr.get("normal", {}), "prior.normal",
                      defaults.prior_normal)
    prior_h = _kernel(pr.get("horizontal", {}), "prior.horizontal",
                      defaults.prior_horizontal)
    prior_v = _kernel(pr.get("vertical", {}), "prior.vertical",
                      defaults.prior_vertical)
    means_raw = pr.get("means", [0.0, 0.0, 0.0])
    if not isinstance(means_raw, list) or len(means_raw) != 3:
        raise ConfigError("prior.means must be a list of three pressures")
    means = tuple(parse_quantity(m, "pressure") for m in means_raw)

    noise = data.get("noise", {})
    _check_keys(noise, {"sigma_strain"}, "noise")
    noise_std = _get(noise, "sigma_strain", float, defaults.noise_std)
    if noise_std <= 0:
        raise ConfigError("noise.sigma_strain must be positive")

    exp = data.get("experiment", {})
    _check_keys(exp, {"patches", "seed", "records", "noise_std",
                      "slice_depths"}, "experiment")
    patches = tuple(_patch_table(p, i)
                    for i, p in enumerate(exp.get("patches", [])))
    slice_depths = tuple(parse_quantity(d, "length")
                         for d in exp.get("slice_depths", []))
    experiment = ExperimentConfig(
        patches=patches,
        seed=_get(exp, "seed", int, 0),
        records=_get(exp, "records", int, 1),
        noise_std=_get(exp, "noise_std", float, 0.0),
        slice_depths=slice_depths,
    )
    if experiment.records < 1:
        raise ConfigError("experiment.records must be >= 1")
    if experiment.noise_std < 0:
        raise ConfigError("experiment.noise_std must be >= 0")

    paths = data.get("paths", {})
    _check_keys(paths, {"output_dir", "mesh", "input_csv"}, "paths")

    def _resolve(p):
        if p is None:
            return None
        p = Path(p)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        return str(p)

    return RunConfig(
        geometry=geometry,
        gauges=gauges,
        band_top=band_top,
        band_bottom=band_bottom,
        material=material,
        constraint=constraint,
        prior_normal=prior_n,
        prior_horizontal=prior_h,
        prior_vertical=prior_v,
        prior_means=means,
        noise_std=noise_std,
        experiment=experiment,
        output_dir=_resolve(paths.get("output_dir", defaults.output_dir)),
        mesh_path=_resolve(paths.get("mesh")),
        input_csv=_resolve(paths.get("input_csv")),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad TOML in {path}: {exc}")
    return parse_config(data, base_dir=path.parent)
