"""Isotropic linear-elastic material parameters."""
from __future__ import annotations

from dataclasses import dataclass


class ElasticityError(ValueError):
    """Invalid material, mesh, or solve input."""


def lame_parameters(youngs_modulus: float, poisson_ratio: float):
    """Convert (E, nu) to the Lame pair (mu, lambda).

    Requires E > 0 and 0 <= nu < 0.5; the incompressible limit is a pole
    of lambda and is rejected.
    """
    if youngs_modulus <= 0:
        raise ElasticityError(f"Young's modulus must be > 0, got {youngs_modulus}")
    if not 0 <= poisson_ratio < 0.5:
        raise ElasticityError(
            f"Poisson ratio must be in [0, 0.5), got {poisson_ratio}"
        )
    mu = youngs_modulus / (2.0 * (1.0 + poisson_ratio))
    lam = (youngs_modulus * poisson_ratio
           / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio)))
    return mu, lam


@dataclass(frozen=True)
class Material:
    """Young's modulus and Poisson ratio with derived Lame parameters."""

    youngs_modulus: float
    poisson_ratio: float

    def __post_init__(self):
        lame_parameters(self.youngs_modulus, self.poisson_ratio)

    @property
    def lame_mu(self) -> float:
        return lame_parameters(self.youngs_modulus, self.poisson_ratio)[0]

    @property
    def lame_lambda(self) -> float:
        return lame_parameters(self.youngs_modulus, self.poisson_ratio)[1]


#: Structural steel defaults used by the reference shell.
STEEL = Material(youngs_modulus=200e9, poisson_ratio=0.3)
