"""Spacing statistics, localisation measures and frequency sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .floquet import (
    FloquetResult,
    Method,
    PropagatorConfig,
    SambeConfig,
    quasi_energies,
)
from .lattice import (
    Boundary,
    DriveParams,
    HoppingProfile,
    LatticeParams,
    build_h1_static,
    hopping_matrix,
)
from .linalg import LinalgError, eig_general

__all__ = [
    "DegenerateSpectrumError",
    "SpacingStats",
    "SpectrumDiagnostics",
    "SweepPoint",
    "SweepResult",
    "StaticClassification",
    "spacing_variance",
    "ipr",
    "mipr",
    "diagnose",
    "evaluate_point",
    "sweep_frequency",
    "classify_static_states",
]


class DegenerateSpectrumError(ValueError):
    """Every spacing is zero, so the normalised variance is undefined."""


class SpacingStats(NamedTuple):
    spacings: np.ndarray
    mean_spacing: float
    variance_norm: float


def spacing_variance(eps, window: tuple[int, int] | None = None) -> SpacingStats:
    """Normalised variance of nearest-neighbour spacings of a sorted spectrum.

    ``Delta = sum (s - s_bar)^2 / (2 n s_bar^2)`` over the ``n`` spacings, so
    ``{0, 1, 4}`` gives 0.125. Spacings are taken on real parts.
    ``window=(start, stop)`` restricts the statistics to levels
    ``start..stop-1``; the default uses all of them.
    """
    re = np.asarray(eps).real.astype(float)
    if window is not None:
        re = re[window[0]:window[1]]
    if re.size < 2:
        raise ValueError("need at least two levels")
    if np.any(np.diff(re) < 0):
        raise ValueError("spectrum must be sorted by real part")
    s = np.diff(re)
    s_bar = s.mean()
    if s_bar <= 0:
        raise DegenerateSpectrumError("all levels coincide; spacing variance undefined")
    delta = float(((s - s_bar) ** 2).sum() / (2 * s.size * s_bar**2))
    return SpacingStats(s, float(s_bar), delta)


def ipr(state) -> float:
    """Inverse participation ratio; independent of the state's normalisation."""
    p = np.abs(np.asarray(state)) ** 2
    total = p.sum()
    if total == 0:
        raise ValueError("IPR of the zero vector is undefined")
    return float((p**2).sum() / total**2)


def mipr(modes) -> float:
    modes = np.asarray(modes)
    return float(np.mean([ipr(modes[:, j]) for j in range(modes.shape[1])]))


@dataclass(frozen=True, eq=False)
class SpectrumDiagnostics:
    spacings: np.ndarray
    mean_spacing: float
    variance_norm: float
    ipr: np.ndarray
    mipr: float
    max_imag: float


def diagnose(fr: FloquetResult, window: tuple[int, int] | None = None) -> SpectrumDiagnostics:
    stats = spacing_variance(fr.quasi_energies, window)
    iprs = np.array([ipr(fr.modes[:, j]) for j in range(fr.modes.shape[1])])
    return SpectrumDiagnostics(
        spacings=stats.spacings,
        mean_spacing=stats.mean_spacing,
        variance_norm=stats.variance_norm,
        ipr=iprs,
        mipr=float(iprs.mean()),
        max_imag=float(np.abs(fr.quasi_energies.imag).max()),
    )


@dataclass(frozen=True)
class SweepPoint:
    omega: float
    delta: float = math.nan
    mipr: float = math.nan
    max_imag: float = math.nan
    mean_spacing: float = math.nan
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass(frozen=True, eq=False)
class SweepResult:
    points: list[SweepPoint]
    omega_c: float
    delta_at_omega_c: float
    ladder_spacing: float
    refined: list[SweepPoint] = field(default_factory=list)
    static_unfolded: bool = False

    @property
    def omega_grid(self) -> np.ndarray:
        return np.array([pt.omega for pt in self.points])

    @property
    def delta_curve(self) -> np.ndarray:
        return np.array([pt.delta for pt in self.points])

    @property
    def mipr_curve(self) -> np.ndarray:
        return np.array([pt.mipr for pt in self.points])

    @property
    def failed(self) -> list[SweepPoint]:
        return [pt for pt in self.points if not pt.ok]


def _static_point(p: LatticeParams, omega: float, profile, window) -> SweepPoint:
    # without drive the unfolded spectrum does not depend on omega
    er = eig_general(hopping_matrix(p, profile))
    fr = FloquetResult(er.values, er.vectors, Method.PROPAGATOR, omega)
    return _point_from(fr, window)


def _point_from(fr: FloquetResult, window) -> SweepPoint:
    diag = diagnose(fr, window)
    return SweepPoint(
        omega=fr.omega,
        delta=diag.variance_norm,
        mipr=diag.mipr,
        max_imag=diag.max_imag,
        mean_spacing=diag.mean_spacing,
    )


def evaluate_point(
    p: LatticeParams,
    omega: float,
    method: Method | str = Method.PROPAGATOR,
    sambe: SambeConfig = SambeConfig(),
    propagator: PropagatorConfig = PropagatorConfig(),
    profile: HoppingProfile | None = None,
    window: tuple[int, int] | None = None,
) -> SweepPoint:
    """Diagnostics at one frequency; numerical failures are captured, not raised."""
    try:
        if p.F0 == 0:
            return _static_point(p, omega, profile, window)
        fr = quasi_energies(p, DriveParams(omega), method, sambe=sambe,
                            propagator=propagator, profile=profile)
        return _point_from(fr, window)
    except (LinalgError, ValueError) as exc:
        return SweepPoint(omega=float(omega), error=f"{type(exc).__name__}: {exc}")


def _evaluate_star(args) -> SweepPoint:
    return evaluate_point(*args)


_INV_PHI = (math.sqrt(5) - 1) / 2


def _golden_refine(f, a: float, b: float, xtol: float) -> list[SweepPoint]:
    """Golden-section search on [a, b]; returns every evaluated point."""
    seen: list[SweepPoint] = []

    def g(x):
        pt = f(x)
        seen.append(pt)
        return pt.delta if pt.ok else math.inf

    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = g(c), g(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = g(d)
    return seen


def sweep_frequency(
    p: LatticeParams,
    omegas,
    method: Method | str = Method.PROPAGATOR,
    *,
    sambe: SambeConfig = SambeConfig(),
    propagator: PropagatorConfig = PropagatorConfig(),
    profile: HoppingProfile | None = None,
    window: tuple[int, int] | None = None,
    refine: bool = True,
    jobs: int = 1,
) -> SweepResult:
    """Scan the spacing variance and MIPR over a frequency grid.

    The critical frequency is the grid argmin of the variance, refined by one
    golden-section pass inside the bracket formed by its grid neighbours.
    Failed points are kept (with their error text) and skipped by the argmin.
    """
    omegas = np.asarray(omegas, dtype=float)
    if omegas.ndim != 1 or omegas.size == 0:
        raise ValueError("omega grid must be a non-empty 1-D sequence")
    if np.any(omegas <= 0) or np.any(np.diff(omegas) <= 0):
        raise ValueError("omega grid must be positive and strictly increasing")

    tasks = [(p, float(w), method, sambe, propagator, profile, window) for w in omegas]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_evaluate_star, tasks))
    else:
        points = [_evaluate_star(t) for t in tasks]

    good = [i for i, pt in enumerate(points) if pt.ok]
    if not good:
        raise LinalgError("every sweep point failed")
    i_min = min(good, key=lambda i: points[i].delta)
    best = points[i_min]

    refined: list[SweepPoint] = []
    if refine and p.F0 != 0 and omegas.size >= 3 and 0 < i_min < omegas.size - 1:
        step = float(np.min(np.diff(omegas)))
        refined = _golden_refine(
            lambda w: evaluate_point(p, w, method, sambe, propagator, profile, window),
            omegas[i_min - 1], omegas[i_min + 1], step / 100,
        )
        for pt in refined:
            if pt.ok and pt.delta < best.delta:
                best = pt

    return SweepResult(
        points=points,
        omega_c=best.omega,
        delta_at_omega_c=best.delta,
        ladder_spacing=best.mean_spacing,
        refined=refined,
        static_unfolded=p.F0 == 0,
    )


@dataclass(frozen=True, eq=False)
class StaticClassification:
    energies: np.ndarray
    modes: np.ndarray  # unit-norm right eigenvectors, columns
    mean_distance: np.ndarray  # <|l|> per state
    center_of_mass: np.ndarray  # <l> per state
    labels: list[str]  # "center" | "edge"
    n_c: int | None  # first edge-localised index, None if there is none


def classify_static_states(p: LatticeParams, threshold: float | None = None) -> StaticClassification:
    """Split the eigenstates of the undriven confined chain into two families.

    A state is centre-localised when its mean distance from site 0 is at most
    ``threshold`` (default ``L/2``), edge-localised otherwise. Parity partners
    mix under degeneracy, so the signed centre of mass is reported separately
    and is only meaningful for the non-reciprocal chain.
    """
    if p.boundary is not Boundary.OPEN:
        raise ValueError("static classification is defined for open chains")
    threshold = p.L / 2 if threshold is None else threshold
    er = eig_general(build_h1_static(p))
    prob = np.abs(er.vectors) ** 2
    prob /= prob.sum(axis=0)
    sites = p.sites.astype(float)
    mean_dist = np.abs(sites) @ prob
    com = sites @ prob
    labels = ["center" if m <= threshold else "edge" for m in mean_dist]
    n_c = next((i for i, lab in enumerate(labels) if lab == "edge"), None)
    return StaticClassification(er.values, er.vectors, mean_dist, com, labels, n_c)
