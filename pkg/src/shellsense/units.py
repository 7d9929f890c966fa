"""Unit-suffix parsing for config values.

Config files store SI values (meters, pascals, radians) as bare numbers;
strings with an explicit suffix ("23.5 cm", "4.0 MPa", "60 deg") are
converted on load. Internally everything is SI.
"""
from __future__ import annotations

import math

_LENGTH_FACTORS = {"m": 1.0, "cm": 1e-2, "mm": 1e-3}
_PRESSURE_FACTORS = {"Pa": 1.0, "kPa": 1e3, "MPa": 1e6, "GPa": 1e9}
_ANGLE_FACTORS = {"rad": 1.0, "deg": math.pi / 180.0}

_FACTORS_BY_KIND = {
    "length": _LENGTH_FACTORS,
    "pressure": _PRESSURE_FACTORS,
    "angle": _ANGLE_FACTORS,
}


class UnitError(ValueError):
    """Raised for unparseable quantities or unknown unit suffixes."""


def parse_quantity(value, kind: str) -> float:
    """Convert a config value to SI float.

    Accepts a bare number (already SI) or a string "<number> <suffix>"
    with a suffix appropriate for *kind* ("length", "pressure", "angle").
    """
    factors = _FACTORS_BY_KIND.get(kind)
    if factors is None:
        raise UnitError(f"unknown quantity kind {kind!r}")
    if isinstance(value, bool):
        raise UnitError(f"expected a {kind}, got boolean {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        parts = value.strip().split()
        if len(parts) != 2:
            raise UnitError(
                f"malformed {kind} {value!r}: expected '<number> <unit>'"
            )
        num, suffix = parts
        try:
            magnitude = float(num)
        except ValueError as exc:
            raise UnitError(f"malformed {kind} {value!r}: bad number") from exc
        if suffix not in factors:
            raise UnitError(
                f"unknown {kind} unit {suffix!r}; accepted: {sorted(factors)}"
            )
        return magnitude * factors[suffix]
    raise UnitError(f"expected a {kind}, got {type(value).__name__}")
