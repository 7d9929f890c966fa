"""Strain time-series container and CSV ingestion.

CSV schema: first column ``t_s`` (seconds, strictly increasing), one
column per gauge named ``<ring>_<angle-deg>_<h|v>`` (e.g. ``mid_120_h``),
strain values dimensionless. A blank cell marks that gauge invalid for
that record. Floats are written with 12 significant digits.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .geometry.gauges import GaugeSet


class StrainCSVError(ValueError):
    """Malformed strain CSV; message carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class StrainSeries:
    """Time-stamped gauge strain records.

    ``values`` is (n_records, n_gauges) with NaN where invalid; ``valid``
    is the matching boolean mask. Records whose gauges are all invalid
    are tolerated here and skipped (with a warning) at inference time.
    """

    gauge_ids: tuple
    times: np.ndarray
    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.times.setflags(write=False)
        self.values.setflags(write=False)
        self.valid.setflags(write=False)

    def __len__(self) -> int:
        return self.times.shape[0]


def parse_strain_csv(path, gauges: GaugeSet) -> StrainSeries:
    """Read and validate a strain CSV against a gauge layout."""
    known = set(gauges.ids)
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise StrainCSVError(1, "empty file") from None
        if not header or header[0] != "t_s":
            raise StrainCSVError(1, "first column must be 't_s'")
        gauge_ids = tuple(h.strip() for h in header[1:])
        if not gauge_ids:
            raise StrainCSVError(1, "no gauge columns")
        for gid in gauge_ids:
            if gid not in known:
                raise StrainCSVError(1, f"unknown gauge id {gid!r}")
        if len(set(gauge_ids)) != len(gauge_ids):
            raise StrainCSVError(1, "duplicated gauge column")

        times, rows, valids = [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(gauge_ids) + 1:
                raise StrainCSVError(
                    line_no,
                    f"expected {len(gauge_ids) + 1} columns, got {len(row)}",
                )
            try:
                t = float(row[0])
            except ValueError:
                raise StrainCSVError(line_no, f"bad timestamp {row[0]!r}")
            if times and t <= times[-1]:
                kind = "duplicated" if t == times[-1] else "non-monotone"
                raise StrainCSVError(line_no, f"{kind} timestamp {t!r}")
            vals = np.full(len(gauge_ids), np.nan)
            mask = np.zeros(len(gauge_ids), dtype=bool)
            for j, cell in enumerate(row[1:]):
                cell = cell.strip()
                if not cell:
                    continue
                try:
                    vals[j] = float(cell)
                except ValueError:
                    raise StrainCSVError(line_no, f"bad strain value {cell!r}")
                if not np.isfinite(vals[j]):
                    raise StrainCSVError(line_no, f"non-finite strain {cell!r}")
                mask[j] = True
            times.append(t)
            rows.append(vals)
            valids.append(mask)
    if not times:
        raise StrainCSVError(2, "no records")
    return StrainSeries(
        gauge_ids=gauge_ids,
        times=np.asarray(times),
        values=np.asarray(rows),
        valid=np.asarray(valids),
    )


def write_strain_csv(path, gauge_ids, times, values, valid=None) -> None:
    """Write records in the documented schema (12 significant digits)."""
    values = np.atleast_2d(np.asarray(values))
    times = np.atleast_1d(np.asarray(times))
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s", *gauge_ids])
        for i, t in enumerate(times):
            row = [f"{t:.12g}"]
            for j in range(values.shape[1]):
                if valid is not None and not valid[i, j]:
                    row.append("")
                else:
                    row.append(f"{values[i, j]:.12g}")
            writer.writerow(row)
