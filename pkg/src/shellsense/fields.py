"""Plain-text exports: VTK fields, per-node posterior CSV, load CSV,
slice profiles.

All CSV floats use 12 significant digits; depths in files are measured
downward from the shell top. The field format is legacy ASCII VTK
(unstructured grid), readable by common visualization tools.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .geometry.cylinder import Mesh
from .geometry.surface import SurfacePatch
from .inference import Posterior

_FMT = "{:.12g}"


class FieldFormatError(ValueError):
    """Malformed field/load file."""


def write_vtk(path, mesh: Mesh, point_data: dict | None = None) -> None:
    """Write the mesh and optional nodal arrays as legacy ASCII VTK.

    ``point_data`` maps names to (N,) scalar or (N, 3) vector arrays.
    """
    point_data = point_data or {}
    n = mesh.node_count
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write("shellsense field export\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {n} double\n")
        for x, y, z in mesh.nodes:
            fh.write(f"{x:.12g} {y:.12g} {z:.12g}\n")
        m = mesh.tets.shape[0]
        fh.write(f"CELLS {m} {5 * m}\n")
        for tet in mesh.tets:
            fh.write(f"4 {tet[0]} {tet[1]} {tet[2]} {tet[3]}\n")
        fh.write(f"CELL_TYPES {m}\n")
        fh.write("10\n" * m)
        if point_data:
            fh.write(f"POINT_DATA {n}\n")
        for name, arr in point_data.items():
            arr = np.asarray(arr)
            if arr.shape == (n,):
                fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                for v in arr:
                    fh.write(f"{v:.12g}\n")
            elif arr.shape == (n, 3):
                fh.write(f"VECTORS {name} double\n")
                for vx, vy, vz in arr:
                    fh.write(f"{vx:.12g} {vy:.12g} {vz:.12g}\n")
            else:
                raise FieldFormatError(
                    f"point data {name!r} has shape {arr.shape}, expected "
                    f"({n},) or ({n}, 3)"
                )


def patch_to_full(mesh: Mesh, patch: SurfacePatch,
                  values: np.ndarray) -> np.ndarray:
    """Scatter a per-patch-node array onto all mesh nodes (zeros outside)."""
    out = np.zeros(mesh.node_count)
    out[patch.node_ids] = values
    return out


def write_posterior_csv(path, mesh: Mesh, patch: SurfacePatch,
                        posterior: Posterior) -> None:
    """Per-node posterior summary: angle, depth, mean and std per component."""
    n = len(patch)
    theta = mesh.node_angles(patch.node_ids)
    depth = mesh.depth_from_top(patch.node_ids)
    mean = posterior.mean
    std = posterior.std
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id", "theta_rad", "depth_m",
                         "mean_N", "mean_H", "mean_V",
                         "std_N", "std_H", "std_V"])
        for i, node in enumerate(patch.node_ids):
            writer.writerow([
                int(node), _FMT.format(theta[i]), _FMT.format(depth[i]),
                _FMT.format(mean[i]), _FMT.format(mean[n + i]),
                _FMT.format(mean[2 * n + i]),
                _FMT.format(std[i]), _FMT.format(std[n + i]),
                _FMT.format(std[2 * n + i]),
            ])


def read_posterior_csv(path):
    """Read a posterior CSV back: (node_ids, theta, depth, mean, std).

    ``mean`` and ``std`` are (n, 3) arrays in (N, H, V) column order.
    """
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["node_id", "theta_rad", "depth_m", "mean_N", "mean_H",
                    "mean_V", "std_N", "std_H", "std_V"]
        if header != expected:
            raise FieldFormatError(f"unexpected posterior CSV header {header}")
        rows = [r for r in reader if r]
    if not rows:
        raise FieldFormatError("posterior CSV has no rows")
    data = np.array([[float(c) for c in r] for r in rows])
    return (data[:, 0].astype(int), data[:, 1], data[:, 2],
            data[:, 3:6], data[:, 6:9])


def write_load_csv(path, mesh: Mesh, patch: SurfacePatch,
                   pressures: np.ndarray) -> None:
    """Nodal (N, H, V) pressures on the patch, one row per node."""
    n = len(patch)
    theta = mesh.node_angles(patch.node_ids)
    depth = mesh.depth_from_top(patch.node_ids)
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id", "theta_rad", "depth_m",
                         "p_N", "p_H", "p_V"])
        for i, node in enumerate(patch.node_ids):
            writer.writerow([
                int(node), _FMT.format(theta[i]), _FMT.format(depth[i]),
                _FMT.format(pressures[i]), _FMT.format(pressures[n + i]),
                _FMT.format(pressures[2 * n + i]),
            ])


def read_load_csv(path, patch: SurfacePatch) -> np.ndarray:
    """Read a load CSV and return the stacked pressure vector for *patch*.

    Rows are matched by node id; every patch node must be present.
    """
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["node_id", "theta_rad", "depth_m", "p_N", "p_H", "p_V"]:
            raise FieldFormatError(f"unexpected load CSV header {header}")
        values = {}
        for row in reader:
            if not row:
                continue
            try:
                values[int(row[0])] = (float(row[3]), float(row[4]),
                                       float(row[5]))
            except (ValueError, IndexError):
                raise FieldFormatError(f"bad load CSV row {row}")
    n = len(patch)
    p = np.zeros(3 * n)
    for i, node in enumerate(patch.node_ids):
        if int(node) not in values:
            raise FieldFormatError(f"load CSV missing patch node {int(node)}")
        pn, ph, pv = values[int(node)]
        p[i], p[n + i], p[2 * n + i] = pn, ph, pv
    return p


def write_slice_csv(path, profile: np.ndarray) -> None:
    """One slice: rows of (theta_rad, mean, std) sorted by angle."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_rad", "mean", "std"])
        for theta, mean, std in profile:
            writer.writerow([_FMT.format(theta), _FMT.format(mean),
                             _FMT.format(std)])


def slice_filename(depth: float) -> str:
    return f"slice_{depth * 100:.2f}cm.csv"


def export_slices(out_dir, profiles: dict) -> list:
    """Write one CSV per requested slice depth; returns the paths."""
    out = []
    for depth, profile in profiles.items():
        path = Path(out_dir) / slice_filename(depth)
        write_slice_csv(path, profile)
        out.append(path)
    return out
