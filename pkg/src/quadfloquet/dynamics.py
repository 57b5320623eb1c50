"""Real-time propagation of Floquet-mode superpositions and revival analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .floquet import FloquetResult, Sampling, slice_propagators
from .lattice import DriveParams, HoppingProfile, LatticeParams, hopping_matrix, potential_diagonal
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "NormBreakdownError",
    "InitialStateSpec",
    "EvolutionTrace",
    "RevivalReport",
    "prepare_state",
    "auto_substeps",
    "evolve",
    "fidelity",
    "biorthogonal_bra",
    "predicted_period",
    "detect_revivals",
]


class NormBreakdownError(ArithmeticError):
    pass


@dataclass(frozen=True)
class InitialStateSpec:
    mode_indices: tuple[int, ...]
    amplitudes: tuple[complex, ...] | None = None  # default: equal weights

    def __post_init__(self):
        idx = tuple(int(i) for i in self.mode_indices)
        if not idx:
            raise ValueError("at least one mode index is required")
        if len(set(idx)) != len(idx):
            raise ValueError(f"duplicate mode indices in {idx}")
        object.__setattr__(self, "mode_indices", idx)
        if self.amplitudes is not None:
            amps = tuple(complex(a) for a in self.amplitudes)
            if len(amps) != len(idx):
                raise ValueError("one amplitude per mode index is required")
            object.__setattr__(self, "amplitudes", amps)


def prepare_state(spec: InitialStateSpec, fr: FloquetResult) -> np.ndarray:
    """Normalised superposition of the selected Floquet modes (site basis)."""
    N = fr.modes.shape[1]
    for i in spec.mode_indices:
        if not 0 <= i < N:
            raise IndexError(f"mode index {i} outside [0, {N})")
    psi = fr.modes[:, list(spec.mode_indices)] @ _amplitudes(spec)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("selected modes cancel to the zero vector")
    return psi / norm


def _amplitudes(spec: InitialStateSpec) -> np.ndarray:
    k = len(spec.mode_indices)
    if spec.amplitudes is None:
        return np.full(k, 1 / math.sqrt(k), dtype=complex)
    return np.array(spec.amplitudes, dtype=complex)


def biorthogonal_bra(spec: InitialStateSpec, fr: FloquetResult) -> np.ndarray:
    """Dual vector ``sum_l c_l |L_l>`` built from the left Floquet modes.

    Left modes are taken from ``fr`` or, if absent, from the inverse of the
    right-mode matrix.
    """
    left = fr.left_modes if fr.left_modes is not None else np.linalg.inv(fr.modes).conj().T
    return left[:, list(spec.mode_indices)] @ _amplitudes(spec)


def fidelity(a, b) -> float:
    """``|<a|b>|`` of the normalised inputs."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("fidelity with the zero vector is undefined")
    return float(min(abs(np.vdot(a, b)) / (na * nb), 1.0))


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    times: np.ndarray
    site_prob: np.ndarray  # (n_times, N), rows sum to one
    fidelity: np.ndarray
    norm: np.ndarray  # norm the state would have without renormalisation
    knobs: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else math.nan

    @property
    def raw_site_prob(self) -> np.ndarray:
        return self.site_prob * self.norm[:, None] ** 2


def auto_substeps(dt: float, d: DriveParams, slices_per_period: int = 128) -> int:
    """Sub-slices per output step so that each slice is at most ``T/slices_per_period``."""
    return max(1, math.ceil(dt * slices_per_period / d.period - 1e-12))


def evolve(
    state,
    p: LatticeParams,
    d: DriveParams,
    dt: float,
    t_max: float,
    profile: HoppingProfile | None = None,
    *,
    substeps: int = 1,
    sampling: Sampling | str = Sampling.LEFT_ENDPOINT,
    bra=None,
    tol: Tolerances = DEFAULT_TOL,
) -> EvolutionTrace:
    """Propagate ``state`` with exponential slices and record the trace every ``dt``.

    Each output step applies ``substeps`` slices of width ``dt/substeps``.
    The state is renormalised after every step; the norm it would otherwise
    carry is logged. ``bra`` switches the fidelity to ``|<bra|psi(t)>|`` on
    the raw state, normalised by its value at t=0 (biorthogonal overlap).
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not t_max >= dt:
        raise ValueError(f"t_max={t_max} must be at least dt={dt}")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    psi = np.asarray(state, dtype=complex).copy()
    if psi.shape != (p.N,):
        raise ValueError(f"state must have length {p.N}")
    n0 = np.linalg.norm(psi)
    if n0 == 0:
        raise ValueError("cannot evolve the zero vector")
    psi /= n0
    psi0 = psi.copy()
    if bra is not None:
        bra = np.asarray(bra, dtype=complex)
        bra_ref = np.vdot(bra, psi0)

    n_steps = int(math.floor(t_max / dt + 1e-9))
    times = dt * np.arange(n_steps + 1)
    h = dt / substeps
    K = hopping_matrix(p, profile)
    diag = potential_diagonal(p)
    lo, hi = tol.norm_bounds

    site_prob = np.empty((n_steps + 1, p.N))
    fid = np.empty(n_steps + 1)
    norm = np.empty(n_steps + 1)
    site_prob[0] = np.abs(psi) ** 2
    fid[0] = 1.0
    norm[0] = 1.0
    log_norm = 0.0

    chunk_steps = max(1, 4096 // substeps)
    for first in range(0, n_steps, chunk_steps):
        last = min(first + chunk_steps, n_steps)
        # slice start times from integer counters avoid accumulated rounding
        j = np.arange(first * substeps, last * substeps)
        slices = slice_propagators(K, diag, d, j * h, h, sampling)
        for k in range(first, last):
            for S in slices[(k - first) * substeps:(k - first + 1) * substeps]:
                psi = S @ psi
            growth = np.linalg.norm(psi)
            log_norm += math.log(growth) if growth > 0 else -math.inf
            if not math.log(lo) <= log_norm <= math.log(hi):
                raise NormBreakdownError(
                    f"state norm left [{lo:.0e}, {hi:.0e}] at t={times[k + 1]:.6g}"
                )
            psi /= growth
            site_prob[k + 1] = np.abs(psi) ** 2
            norm[k + 1] = math.exp(log_norm)
            if bra is None:
                fid[k + 1] = min(abs(np.vdot(psi0, psi)), 1.0)
            else:
                fid[k + 1] = abs(np.vdot(bra, psi)) * norm[k + 1] / abs(bra_ref)

    knobs = {"dt": dt, "substeps": substeps, "sampling": Sampling(sampling).value,
             "fidelity": "ordinary" if bra is None else "biorthogonal"}
    return EvolutionTrace(times, site_prob, fid, norm, knobs)


def predicted_period(fr: FloquetResult, modes=None) -> float:
    """Revival time ``2 pi / dE`` with ``dE`` the mean real-part spacing.

    ``modes`` restricts the spacing to the block of levels an initial state
    occupies; by default the whole spectrum is used.
    """
    eps = fr.quasi_energies if modes is None or len(modes) < 2 else fr.quasi_energies[list(modes)]
    re = np.sort(eps.real)
    return 2 * math.pi / float(np.diff(re).mean())


@dataclass(frozen=True, eq=False)
class RevivalReport:
    peak_times: np.ndarray
    peak_fidelities: np.ndarray
    period_estimate: float
    predicted_period: float
    found: bool = True

    def as_dict(self) -> dict:
        return {
            "peak_times": [float(x) for x in self.peak_times],
            "peak_fidelities": [float(x) for x in self.peak_fidelities],
            "period_estimate": self.period_estimate,
            "predicted_period": self.predicted_period,
            "found": self.found,
        }


def detect_revivals(
    trace: EvolutionTrace,
    fr: FloquetResult | None = None,
    *,
    modes=None,
    period: float | None = None,
    threshold: float = 0.5,
    min_periods: float = 3.0,
) -> RevivalReport:
    """Locate fidelity peaks and estimate the revival period.

    Peaks must exceed ``threshold`` and be at least half a predicted period
    apart. The estimate is the mean gap between consecutive peaks; a single
    peak is measured from t=0.
    """
    if period is None:
        if fr is None:
            raise ValueError("need a Floquet result or an explicit predicted period")
        period = predicted_period(fr, modes)
    span = trace.times[-1] - trace.times[0]
    if span < min_periods * period:
        raise ValueError(
            f"trace spans {span:.4g}, shorter than {min_periods} predicted periods "
            f"({period:.4g} each)"
        )
    dt = trace.dt
    distance = max(1, int(math.floor(0.5 * period / dt)))
    peaks, props = find_peaks(trace.fidelity, height=threshold, distance=distance)
    times = trace.times[peaks]
    heights = props["peak_heights"]
    if times.size == 0:
        return RevivalReport(times, heights, math.nan, period, found=False)
    gaps = np.diff(np.concatenate([[trace.times[0]], times])) if times.size == 1 else np.diff(times)
    return RevivalReport(times, heights, float(gaps.mean()), period)
