"""Numerical tolerances shared by every layer of the package.

All thresholds live here so that a run manifest can record exactly which
values were in force.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    eig: float = 1e-10  # relative eigen-residual ||Av - lv|| / ||A||
    herm: float = 1e-12  # relative ||A - A^H|| accepted as Hermitian
    branch_angle: float = 1e-9  # rad, distance from the negative real axis
    branch_shift: float = 1e-6  # rad, rotation applied near the branch cut
    leak: float = 1e-6  # Sambe weight allowed in the outermost photon sectors
    sambe_max_dim: int = 12_000
    norm_bounds: tuple[float, float] = (1e-12, 1e12)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOL = Tolerances()
