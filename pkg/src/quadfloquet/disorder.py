"""Seeded bond disorder and the ensemble-averaged revival peak."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    EvolutionTrace,
    InitialStateSpec,
    auto_substeps,
    evolve,
    predicted_period,
    prepare_state,
)
from .floquet import Method, PropagatorConfig, SambeConfig, Sampling, quasi_energies
from .lattice import DriveParams, HoppingProfile, LatticeParams
from .linalg import LinalgError

__all__ = [
    "PRNG_NAME",
    "DisorderConfig",
    "RevivalProtocol",
    "DisorderCurve",
    "realization_seed",
    "sample_profile",
    "fmax_at_revivals",
    "revival_fmax",
    "disorder_scan",
]

PRNG_NAME = "PCG64 (numpy SeedSequence, spawn_key=(lambda index, realization index))"


@dataclass(frozen=True)
class DisorderConfig:
    lambda_grid: tuple[float, ...]
    n_realizations: int = 20
    master_seed: int = 0

    def __post_init__(self):
        grid = tuple(float(x) for x in self.lambda_grid)
        if not grid:
            raise ValueError("lambda grid is empty")
        if any(not math.isfinite(x) or x < 0 for x in grid):
            raise ValueError(f"disorder strengths must be finite and >= 0, got {grid}")
        object.__setattr__(self, "lambda_grid", grid)
        if int(self.n_realizations) != self.n_realizations or self.n_realizations < 1:
            raise ValueError("n_realizations must be a positive integer")
        object.__setattr__(self, "n_realizations", int(self.n_realizations))
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "master_seed", seed)


def realization_seed(master_seed: int, i_lambda: int, i_real: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(i_lambda, i_real))


def sample_profile(p: LatticeParams, lam: float, seed) -> HoppingProfile:
    """Bond hoppings ``J + U(-lam, lam)``, drawn independently per bond and direction.

    All right hoppings are drawn first, then all left hoppings. ``lam == 0``
    returns the uniform profile without touching the generator.
    """
    if not lam >= 0:
        raise ValueError(f"disorder strength must be >= 0, got {lam}")
    if lam == 0:
        return HoppingProfile.uniform(p)
    rng = np.random.default_rng(seed)
    j1 = p.J1 + rng.uniform(-lam, lam, p.n_bonds)
    j2 = p.J2 + rng.uniform(-lam, lam, p.n_bonds)
    return HoppingProfile(j1, j2)


def fmax_at_revivals(
    trace: EvolutionTrace,
    predicted_period: float,
    n_periods: int = 3,
    half_width: float = 0.15,
) -> float:
    """Largest fidelity inside the windows ``[c t_c (1-w), c t_c (1+w)]``, c = 1..n."""
    if not predicted_period > 0:
        raise ValueError("predicted period must be positive")
    t = trace.times
    if t[-1] < n_periods * predicted_period:
        raise ValueError(
            f"trace ends at t={t[-1]:.4g}, before {n_periods} revival periods "
            f"({n_periods * predicted_period:.4g})"
        )
    best = -math.inf
    for c in range(1, n_periods + 1):
        mask = (t >= c * predicted_period * (1 - half_width)) & (t <= c * predicted_period * (1 + half_width))
        if mask.any():
            best = max(best, float(trace.fidelity[mask].max()))
    return best


@dataclass(frozen=True)
class RevivalProtocol:
    """How one revival trajectory is produced and scored."""

    initial: InitialStateSpec
    dt: float = 0.1
    substeps: int | None = None  # None: slices no wider than T/128
    sampling: Sampling = Sampling.MIDPOINT
    n_periods: int = 3
    half_width: float = 0.15
    method: Method = Method.PROPAGATOR
    sambe: SambeConfig = SambeConfig()
    propagator: PropagatorConfig = PropagatorConfig()

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.substeps is not None and self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.n_periods < 1 or not 0 < self.half_width < 1:
            raise ValueError("need n_periods >= 1 and 0 < half_width < 1")
        object.__setattr__(self, "sampling", Sampling(self.sampling))
        object.__setattr__(self, "method", Method(self.method))

    def steps(self, d: DriveParams) -> int:
        return self.substeps if self.substeps is not None else auto_substeps(self.dt, d)

    def t_max(self, period: float) -> float:
        # cover the last window completely
        return self.dt * math.ceil(self.n_periods * period * (1 + self.half_width) / self.dt)


def revival_fmax(
    p: LatticeParams,
    d: DriveParams,
    protocol: RevivalProtocol,
    period: float,
    profile: HoppingProfile | None = None,
) -> float:
    """Evolve the protocol state in (possibly disordered) ``profile`` and score it."""
    fr = quasi_energies(p, d, protocol.method, sambe=protocol.sambe,
                        propagator=protocol.propagator, profile=profile)
    psi0 = prepare_state(protocol.initial, fr)
    trace = evolve(psi0, p, d, protocol.dt, protocol.t_max(period), profile,
                   substeps=protocol.steps(d), sampling=protocol.sampling)
    return fmax_at_revivals(trace, period, protocol.n_periods, protocol.half_width)


@dataclass(frozen=True, eq=False)
class DisorderCurve:
    lam: float
    mean_fmax: float
    std_fmax: float  # population standard deviation over surviving realizations
    per_realization: np.ndarray  # NaN marks a failed realization
    n_ok: int
    n_negative: int  # realizations that drew at least one negative hopping
    errors: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return 2 * self.n_ok >= self.per_realization.size

    @property
    def sem(self) -> float:
        return self.std_fmax / math.sqrt(self.n_ok) if self.n_ok else math.nan


def _one_realization(args) -> tuple[float, bool, str]:
    p, d, protocol, period, lam, seed = args
    profile = sample_profile(p, lam, seed)
    try:
        return revival_fmax(p, d, protocol, period, profile), profile.has_negative, ""
    except (LinalgError, ArithmeticError, ValueError) as exc:
        return math.nan, profile.has_negative, f"{type(exc).__name__}: {exc}"


def clean_period(p: LatticeParams, d: DriveParams, protocol: RevivalProtocol) -> float:
    fr = quasi_energies(p, d, protocol.method, sambe=protocol.sambe, propagator=protocol.propagator)
    return predicted_period(fr, protocol.initial.mode_indices)


def disorder_scan(
    p: LatticeParams,
    d: DriveParams,
    protocol: RevivalProtocol,
    dc: DisorderConfig,
    *,
    period: float | None = None,
    jobs: int = 1,
) -> list[DisorderCurve]:
    """Ensemble-averaged revival peak for every disorder strength.

    The drive frequency and the revival period stay at their clean-system
    values; each realization uses its own Floquet modes for the initial state.
    Results are aggregated in (lambda index, realization index) order, so the
    output does not depend on ``jobs``.
    """
    if period is None:
        period = clean_period(p, d, protocol)
    tasks = [
        (p, d, protocol, period, lam, realization_seed(dc.master_seed, i, r))
        for i, lam in enumerate(dc.lambda_grid)
        for r in range(dc.n_realizations)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one_realization, tasks))
    else:
        results = [_one_realization(t) for t in tasks]

    curves = []
    n = dc.n_realizations
    for i, lam in enumerate(dc.lambda_grid):
        chunk = results[i * n:(i + 1) * n]
        vals = np.array([r[0] for r in chunk])
        ok = vals[np.isfinite(vals)]
        n_ok = int(ok.size)
        valid = 2 * n_ok >= n
        curves.append(DisorderCurve(
            lam=lam,
            mean_fmax=float(ok.mean()) if valid and n_ok else math.nan,
            std_fmax=float(ok.std()) if valid and n_ok else math.nan,
            per_realization=vals,
            n_ok=n_ok,
            n_negative=sum(r[1] for r in chunk),
            errors=[r[2] for r in chunk if r[2]],
        ))
    return curves
