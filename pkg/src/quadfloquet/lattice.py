"""Tight-binding chain with a spatially quadratic, harmonically driven potential.

Sites are labelled ``l = -L..L`` and stored at array index ``l + L``.
Hopping convention: ``<l+1|H|l> = -J1`` (rightward transfer) and
``<l|H|l+1> = -J2``. A periodic chain closes the ring with the bond from
site ``L`` to site ``-L`` using the same convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

__all__ = [
    "Boundary",
    "LatticeParams",
    "DriveParams",
    "HoppingProfile",
    "hopping_matrix",
    "build_h0",
    "potential_diagonal",
    "drive_value",
    "build_h1_static",
    "build_ht",
]


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class LatticeParams:
    L: int
    J1: float
    J2: float
    F0: float
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        for name in ("J1", "J2", "F0"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def N(self) -> int:
        return 2 * self.L + 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.L, self.L + 1)

    @property
    def n_bonds(self) -> int:
        return self.N if self.boundary is Boundary.PERIODIC else self.N - 1

    @property
    def hermitian(self) -> bool:
        return self.J1 == self.J2

    def with_boundary(self, boundary) -> LatticeParams:
        return replace(self, boundary=Boundary(boundary))


@dataclass(frozen=True)
class DriveParams:
    omega: float

    def __post_init__(self):
        omega = float(self.omega)
        if not math.isfinite(omega) or omega <= 0:
            raise ValueError(f"omega must be finite and > 0, got {self.omega}")
        object.__setattr__(self, "omega", omega)

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega


@dataclass(frozen=True, eq=False)
class HoppingProfile:
    """Per-bond hoppings; bond ``b`` joins storage index ``b`` to ``b + 1``
    (mod N on a ring)."""

    j1: np.ndarray = field(repr=False)
    j2: np.ndarray = field(repr=False)

    def __post_init__(self):
        j1 = np.asarray(self.j1, dtype=float).copy()
        j2 = np.asarray(self.j2, dtype=float).copy()
        if j1.ndim != 1 or j1.shape != j2.shape:
            raise ValueError("j1 and j2 must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(j1)) and np.all(np.isfinite(j2))):
            raise ValueError("hopping profile has non-finite entries")
        j1.setflags(write=False)
        j2.setflags(write=False)
        object.__setattr__(self, "j1", j1)
        object.__setattr__(self, "j2", j2)

    @classmethod
    def uniform(cls, p: LatticeParams) -> HoppingProfile:
        return cls(np.full(p.n_bonds, p.J1), np.full(p.n_bonds, p.J2))

    @property
    def has_negative(self) -> bool:
        return bool((self.j1 < 0).any() or (self.j2 < 0).any())

    def check(self, p: LatticeParams) -> None:
        if self.j1.size != p.n_bonds:
            raise ValueError(
                f"profile has {self.j1.size} bonds, a {p.boundary.value} chain "
                f"with N={p.N} needs {p.n_bonds}"
            )


def hopping_matrix(p: LatticeParams, profile: HoppingProfile | None = None) -> np.ndarray:
    """Hopping part of the Hamiltonian, uniform or from a per-bond profile."""
    if profile is None:
        profile = HoppingProfile.uniform(p)
    profile.check(p)
    N = p.N
    H = np.zeros((N, N), dtype=np.complex128)
    src = np.arange(p.n_bonds)
    dst = (src + 1) % N
    H[dst, src] = -profile.j1
    H[src, dst] = -profile.j2
    return H


def build_h0(p: LatticeParams) -> np.ndarray:
    return hopping_matrix(p)


def potential_diagonal(p: LatticeParams) -> np.ndarray:
    """On-site curvature ``F0 * l**2`` for ``l = -L..L``."""
    return p.F0 * p.sites.astype(float) ** 2


def drive_value(l: int, t: float, F0: float, omega: float) -> float:
    return F0 * l * l * math.cos(omega * t)


def build_h1_static(p: LatticeParams) -> np.ndarray:
    return build_h0(p) + np.diag(potential_diagonal(p))


def drive_phase_cos(d: DriveParams, t) -> np.ndarray | float:
    # reducing t modulo the period keeps long runs exactly periodic
    return np.cos(d.omega * np.fmod(t, d.period))


def build_ht(
    p: LatticeParams,
    d: DriveParams,
    t: float,
    profile: HoppingProfile | None = None,
) -> np.ndarray:
    """Instantaneous Hamiltonian: hopping part plus ``F0 l^2 cos(omega t)``."""
    H = hopping_matrix(p, profile)
    H[np.diag_indices(p.N)] += potential_diagonal(p) * drive_phase_cos(d, t)
    return H
