"""Command-line pipeline: mesh, synth, infer, forward, validate,
export-slices.

Exit codes: 0 success, 1 runtime failure (including validation-suite
failures), 2 configuration or input errors. The environment variable
``SHELLSENSE_THREADS`` sets the per-record worker count for inference;
outputs are deterministic regardless of its value.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .elasticity.material import ElasticityError
from .experiments import (
    ExperimentError,
    PatchSpec,
    patch_load,
    recovery_metrics,
    synthesize_observations,
)
from .fields import (
    FieldFormatError,
    export_slices,
    patch_to_full,
    read_load_csv,
    read_posterior_csv,
    write_load_csv,
    write_posterior_csv,
    write_vtk,
)
from .geometry.cylinder import GeometryError, mesh_volume
from .geometry.mesh_file import MeshFormatError, save_mesh
from .inference import (
    InferenceError,
    Posterior,
    infer_timeseries,
    posterior_displacement,
)
from .pipeline import build_mesh, build_model
from .prior import PriorError
from .strain_csv import StrainCSVError, parse_strain_csv, write_strain_csv
from .validation import run_validation

logger = logging.getLogger(__name__)

_USER_ERRORS = (ConfigError, GeometryError, MeshFormatError, StrainCSVError,
                FieldFormatError, ExperimentError, FileNotFoundError)
_RUNTIME_ERRORS = (ElasticityError, InferenceError, PriorError)

RECORD_CADENCE_S = 0.5


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _patch_specs(config: RunConfig):
    if not config.experiment.patches:
        raise ExperimentError(
            "no [[experiment.patches]] configured; nothing to synthesize"
        )
    return [PatchSpec(**table) for table in config.experiment.patches]


def cmd_mesh(config: RunConfig, args) -> int:
    mesh = build_mesh(config)
    out = _out_dir(config)
    path = Path(config.mesh_path) if config.mesh_path else out / "mesh.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_mesh(mesh, path)
    config.write_resolved(out)
    spec = config.geometry
    expected = (
        math.pi * spec.height
        * (spec.outer_radius ** 2 - spec.inner_radius ** 2)
    )
    print(f"mesh written to {path}")
    print(f"  nodes: {mesh.node_count}  tets: {mesh.tets.shape[0]}  "
          f"boundary tris: {mesh.surface_tris.shape[0]}")
    print(f"  volume: {mesh_volume(mesh):.6e} m^3 "
          f"(smooth barrel reference {expected:.6e} m^3)")
    return 0


def cmd_synth(config: RunConfig, args) -> int:
    specs = _patch_specs(config)
    bundle = build_model(config)
    out = _out_dir(config)
    p_true = patch_load(bundle.mesh, bundle.patch, specs,
                        config.geometry.outer_radius)

    exp = config.experiment
    live_ids = bundle.observation.gauge_ids
    times, rows = [], []
    for rec in range(exp.records):
        obs = synthesize_observations(
            p_true, bundle.observation, exp.noise_std,
            seed=(exp.seed, rec), timestamp=rec * RECORD_CADENCE_S,
        )
        times.append(obs.timestamp)
        rows.append(obs.strains)
    csv_path = out / "observations.csv"
    write_strain_csv(csv_path, live_ids, np.array(times), np.array(rows))
    truth_path = out / "truth_load.csv"
    write_load_csv(truth_path, bundle.mesh, bundle.patch, p_true)
    n = len(bundle.patch)
    write_vtk(out / "truth_load.vtk", bundle.mesh, {
        "p_N": patch_to_full(bundle.mesh, bundle.patch, p_true[:n]),
        "p_H": patch_to_full(bundle.mesh, bundle.patch, p_true[n:2 * n]),
        "p_V": patch_to_full(bundle.mesh, bundle.patch, p_true[2 * n:]),
    })
    config.write_resolved(out)
    print(f"synthesized {exp.records} record(s) -> {csv_path}")
    print(f"truth field -> {truth_path}")
    return 0


def _write_record_outputs(bundle, posterior: Posterior, out: Path,
                          slice_depths, tag: str, fields: bool) -> None:
    records_dir = out / "records"
    records_dir.mkdir(exist_ok=True)
    write_posterior_csv(records_dir / f"posterior_{tag}.csv",
                        bundle.mesh, bundle.patch, posterior)
    if slice_depths:
        metrics = recovery_metrics(bundle.mesh, bundle.patch, posterior,
                                   slice_depths=slice_depths)
        slice_dir = out / "slices" / tag
        slice_dir.mkdir(parents=True, exist_ok=True)
        export_slices(slice_dir, metrics.slice_profiles)
    if fields:
        n = len(bundle.patch)
        displacement = posterior_displacement(posterior, bundle.system,
                                              bundle.loads)
        write_vtk(out / f"posterior_{tag}.vtk", bundle.mesh, {
            "mean_N": patch_to_full(bundle.mesh, bundle.patch,
                                    posterior.mean[:n]),
            "std_N": patch_to_full(bundle.mesh, bundle.patch,
                                   posterior.std[:n]),
            "displacement": displacement.reshape(-1, 3),
        })


def cmd_infer(config: RunConfig, args) -> int:
    csv_path = args.input or config.input_csv
    if not csv_path:
        raise ConfigError("no input CSV (use --input or paths.input_csv)")
    bundle = build_model(config)
    series = parse_strain_csv(csv_path, bundle.gauges)
    threads = int(os.environ.get("SHELLSENSE_THREADS", "1"))
    posteriors = infer_timeseries(series, bundle.observation, bundle.prior,
                                  config.noise_std, full_cov=args.full_cov,
                                  threads=threads)
    if not posteriors:
        raise InferenceError("no records with valid gauges in the series")
    out = _out_dir(config)
    config.write_resolved(out)
    depths = config.experiment.slice_depths
    fields_every = args.fields_every
    diag_path = out / "diagnostics.csv"
    with open(diag_path, "w", encoding="ascii") as fh:
        fh.write("t_s,n_gauges,residual_max,data_misfit,"
                 "innovation_norm,predictive_condition\n")
        for i, post in enumerate(posteriors):
            tag = f"{post.timestamp:.12g}s"
            want_fields = (fields_every > 0 and i % fields_every == 0) or (
                fields_every == 0 and i == len(posteriors) - 1)
            _write_record_outputs(bundle, post, out, depths, tag, want_fields)
            d = post.diagnostics
            fh.write(f"{post.timestamp:.12g},{d['n_gauges']},"
                     f"{d['residual_max']:.12g},{d['data_misfit']:.12g},"
                     f"{d['innovation_norm']:.12g},"
                     f"{d['predictive_condition']:.12g}\n")
    print(f"processed {len(posteriors)} record(s); diagnostics -> {diag_path}")
    worst = max(p.diagnostics["residual_max"] for p in posteriors)
    print(f"worst posterior-predictive residual: {worst:.3e}")
    return 0


def cmd_forward(config: RunConfig, args) -> int:
    if not args.input:
        raise ConfigError("forward requires --input <load CSV>")
    bundle = build_model(config)
    p = read_load_csv(args.input, bundle.patch)
    strains = bundle.observation.predict(p)
    out = _out_dir(config)
    path = Path(args.output) if args.output else out / "forward_strains.csv"
    write_strain_csv(path, bundle.observation.gauge_ids, np.array([0.0]),
                     strains[None, :])
    config.write_resolved(out)
    print(f"gauge strains -> {path}")
    for gid, e in zip(bundle.observation.gauge_ids, strains):
        print(f"  {gid}: {e:.6e}")
    return 0


def cmd_validate(config: RunConfig, args) -> int:
    results = run_validation(config, flip_normal_sign=args.flip_normal_sign)
    failures = 0
    for res in results:
        print(res.line())
        failures += not res.passed
    if failures:
        print(f"{failures} of {len(results)} checks failed")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def cmd_export_slices(config: RunConfig, args) -> int:
    if not args.input:
        raise ConfigError("export-slices requires --input <posterior CSV>")
    depths = ([float(d) for d in args.depths]
              if args.depths else list(config.experiment.slice_depths))
    if not depths:
        raise ConfigError("no slice depths (use --depths or config)")
    mesh = build_mesh(config)
    from .geometry.surface import tag_load_surface
    patch = tag_load_surface(mesh, config.band_top, config.band_bottom)
    node_ids, _, _, mean, std = read_posterior_csv(args.input)
    order = {int(n): i for i, n in enumerate(node_ids)}
    try:
        perm = np.array([order[int(n)] for n in patch.node_ids])
    except KeyError as exc:
        raise FieldFormatError(
            f"posterior CSV missing patch node {exc.args[0]}"
        ) from exc
    stacked_mean = np.concatenate([mean[perm, c] for c in range(3)])
    stacked_var = np.concatenate([std[perm, c] ** 2 for c in range(3)])
    posterior = Posterior(mean=stacked_mean, variances=stacked_var)
    metrics = recovery_metrics(mesh, patch, posterior, slice_depths=depths)
    out = _out_dir(config)
    paths = export_slices(out, metrics.slice_profiles)
    for p in paths:
        print(f"slice -> {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shellsense",
        description="Infer exterior surface pressures on a cylindrical "
                    "shell from interior strain gauges.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", required=True,
                       help="TOML configuration file")
        p.set_defaults(func=func)
        return p

    add("mesh", cmd_mesh, "generate the shell mesh and write it to disk")
    add("synth", cmd_synth,
        "synthesize gauge observations for the configured truth patches")
    p = add("infer", cmd_infer,
            "infer surface pressures from a strain CSV")
    p.add_argument("-i", "--input", help="strain CSV (default from config)")
    p.add_argument("--full-cov", action="store_true",
                   help="form the dense posterior covariance per record")
    p.add_argument("--fields-every", type=int, default=0, metavar="N",
                   help="write VTK fields every N records (0: last only)")
    p = add("forward", cmd_forward,
            "apply a nodal load file and emit predicted gauge strains")
    p.add_argument("-i", "--input", help="load CSV (node_id,...,p_N,p_H,p_V)")
    p.add_argument("-o", "--output", help="strain CSV output path")
    p = add("validate", cmd_validate, "run the property/oracle check suites")
    p.add_argument("--flip-normal-sign", action="store_true",
                   help="fault injection: invert the normal load column")
    p = add("export-slices", cmd_export_slices,
            "re-slice a posterior CSV at given depths")
    p.add_argument("-i", "--input", help="posterior CSV from an infer run")
    p.add_argument("--depths", nargs="*",
                   help="slice depths below the top, meters")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config)
        return args.func(config, args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _RUNTIME_ERRORS as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
