"""Quasi-energies and Floquet modes by two independent routes.

* Sambe route: diagonalise the photon-sector block matrix truncated at
  ``|n| <= M`` and keep one representative per Floquet state.
* Propagator route: build the one-period propagator from ``Q`` exponential
  time slices and take ``(i/T) log U``.

Quasi-energies are folded into the zone ``(-omega/2, omega/2]`` and ordered by
real part (ties by imaginary part); that ordering defines the mode index used
everywhere downstream.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import linear_sum_assignment

from .lattice import (
    DriveParams,
    HoppingProfile,
    LatticeParams,
    drive_phase_cos,
    hopping_matrix,
    potential_diagonal,
)
from .linalg import (
    BranchCutError,
    eig_general,
    eig_hermitian,
    expm,
    logm_branch_shifted,
    logm_principal,
)
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "Method",
    "Sampling",
    "SambeConfig",
    "PropagatorConfig",
    "FloquetResult",
    "SambeTooLargeError",
    "SambeLeakageWarning",
    "fold",
    "fold_distance",
    "fourier_components",
    "default_photon_cutoff",
    "build_sambe",
    "quasi_energies_sambe",
    "slice_propagators",
    "one_period_propagator",
    "quasi_energies_propagator",
    "quasi_energies",
    "converge_propagator",
    "converge_sambe",
]


class Method(str, Enum):
    SAMBE = "sambe"
    PROPAGATOR = "propagator"


class Sampling(str, Enum):
    LEFT_ENDPOINT = "left_endpoint"
    MIDPOINT = "midpoint"
    CFM4 = "cfm4"  # fourth-order commutator-free Magnus, two Gauss nodes


class SambeTooLargeError(ValueError):
    pass


class SambeLeakageWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SambeConfig:
    M: int | None = None  # None: pick from the drive and hopping scales

    def __post_init__(self):
        if self.M is not None and (int(self.M) != self.M or self.M < 0):
            raise ValueError(f"M must be a non-negative integer, got {self.M!r}")


@dataclass(frozen=True)
class PropagatorConfig:
    Q: int = 1024
    sampling: Sampling = Sampling.LEFT_ENDPOINT

    def __post_init__(self):
        if int(self.Q) != self.Q or self.Q < 1:
            raise ValueError(f"Q must be a positive integer, got {self.Q!r}")
        object.__setattr__(self, "Q", int(self.Q))
        object.__setattr__(self, "sampling", Sampling(self.sampling))


@dataclass(frozen=True, eq=False)
class FloquetResult:
    quasi_energies: np.ndarray  # folded, sorted
    modes: np.ndarray  # columns: unit-norm Floquet states at t = 0, site basis
    method: Method
    omega: float
    left_modes: np.ndarray | None = None
    unfolded: np.ndarray | None = None  # Sambe eigenvalues before folding
    leaky: bool = False
    knobs: dict = field(default_factory=dict)

    @property
    def fold_zone(self) -> tuple[float, float]:
        return (-self.omega / 2, self.omega / 2)

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    @property
    def N(self) -> int:
        return self.quasi_energies.size


def fold(eps, omega: float):
    """Map real parts into ``(-omega/2, omega/2]``; imaginary parts untouched."""
    eps = np.asarray(eps)
    re = eps.real
    k = np.ceil((re - omega / 2) / omega)
    folded = re - k * omega
    # rounding can land exactly on the open end
    folded = np.where(folded <= -omega / 2, folded + omega, folded)
    if np.iscomplexobj(eps):
        return folded + 1j * eps.imag
    return folded


def fold_distance(a, b, omega: float) -> float:
    """Largest mismatch between two spectra compared modulo ``omega``.

    Levels are paired by an optimal assignment on the circular distance of
    the real parts plus the imaginary-part difference.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("spectra differ in size")
    d = a.real[:, None] - b.real[None, :]
    d = np.abs(d - omega * np.round(d / omega))
    cost = d + np.abs(a.imag[:, None] - b.imag[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def fourier_components(
    p: LatticeParams, profile: HoppingProfile | None = None
) -> dict[int, np.ndarray]:
    """Nonzero Fourier blocks of the drive: hopping at n=0, ``F0 l^2 / 2`` at n=+-1."""
    half = np.diag(potential_diagonal(p) / 2).astype(np.complex128)
    return {0: hopping_matrix(p, profile), 1: half, -1: half.copy()}


def default_photon_cutoff(p: LatticeParams, d: DriveParams,
                          profile: HoppingProfile | None = None) -> int:
    h0_scale = np.linalg.norm(hopping_matrix(p, profile), 2)
    return int(math.ceil((h0_scale + p.F0 * p.L**2) / d.omega)) + 4


def _resolve_M(p, d, c: SambeConfig, profile) -> int:
    return default_photon_cutoff(p, d, profile) if c.M is None else int(c.M)


def build_sambe(
    p: LatticeParams,
    d: DriveParams,
    c: SambeConfig = SambeConfig(),
    profile: HoppingProfile | None = None,
    *,
    tol: Tolerances = DEFAULT_TOL,
) -> np.ndarray:
    """Truncated Sambe matrix: block row ``r`` carries ``H0 + (M - r) omega``."""
    M = _resolve_M(p, d, c, profile)
    K = 2 * M + 1
    dim = K * p.N
    if dim > tol.sambe_max_dim:
        raise SambeTooLargeError(
            f"Sambe matrix of dimension {dim} (M={M}, N={p.N}) exceeds the cap "
            f"{tol.sambe_max_dim}"
        )
    comps = fourier_components(p, profile)
    shifts = np.diag((M - np.arange(K)) * d.omega)
    S = np.kron(np.eye(K), comps[0]) + np.kron(shifts, np.eye(p.N))
    S += np.kron(np.eye(K, k=-1), comps[1]) + np.kron(np.eye(K, k=1), comps[-1])
    return S


def quasi_energies_sambe(
    p: LatticeParams,
    d: DriveParams,
    c: SambeConfig = SambeConfig(),
    profile: HoppingProfile | None = None,
    *,
    tol: Tolerances = DEFAULT_TOL,
) -> FloquetResult:
    """Diagonalise the truncated Sambe matrix and pick N representatives.

    Candidates are ranked by their weight in the central photon sector.
    Copies of an already accepted Floquet state (same quasi-energy modulo
    omega and parallel t=0 state) are skipped.
    """
    M = _resolve_M(p, d, c, profile)
    S = build_sambe(p, d, SambeConfig(M), profile, tol=tol)
    N, K = p.N, 2 * M + 1
    if profile is None:
        hermitian = p.hermitian
    else:
        hermitian = np.array_equal(profile.j1, profile.j2)
    er = eig_hermitian(S, tol=tol) if hermitian else eig_general(S, tol=tol)

    blocks = er.vectors.reshape(K, N, -1)  # (sector, site, eigvec)
    sector_w = (np.abs(blocks) ** 2).sum(axis=1)
    sector_w /= sector_w.sum(axis=0)
    central = sector_w[M]
    t0_states = blocks.sum(axis=0)
    t0_states /= np.linalg.norm(t0_states, axis=0)

    folded_all = fold(er.values, d.omega)
    accepted: list[int] = []
    for j in np.argsort(-central, kind="stable"):
        duplicate = False
        for i in accepted:
            gap = folded_all[j].real - folded_all[i].real
            gap -= d.omega * round(gap / d.omega)
            if abs(gap) < 1e-4 * d.omega and abs(np.vdot(t0_states[:, i], t0_states[:, j])) > 0.9:
                duplicate = True
                break
        if not duplicate:
            accepted.append(int(j))
        if len(accepted) == N:
            break
    idx = np.array(accepted)

    if p.F0 == 0:
        leak = np.zeros(idx.size)
    elif M == 0:
        leak = np.ones(idx.size)
    else:
        leak = sector_w[0, idx] + sector_w[-1, idx]
    leaky = bool(leak.max() > tol.leak)
    if leaky:
        warnings.warn(
            f"Sambe truncation M={M} leaks weight {leak.max():.2e} into the "
            f"outermost photon sectors (limit {tol.leak:.0e})",
            SambeLeakageWarning,
            stacklevel=2,
        )

    eps = folded_all[idx]
    order = np.lexsort((eps.imag, eps.real))
    return FloquetResult(
        quasi_energies=np.asarray(eps[order], dtype=complex),
        modes=t0_states[:, idx[order]],
        method=Method.SAMBE,
        omega=d.omega,
        unfolded=np.asarray(er.values[idx[order]], dtype=complex),
        leaky=leaky,
        knobs={"M": M, "max_leak": float(leak.max())},
    )


# Gauss nodes and weights of the two-exponential fourth-order scheme
_C1 = 0.5 - math.sqrt(3) / 6
_C2 = 0.5 + math.sqrt(3) / 6
_A1 = 0.25 - math.sqrt(3) / 6
_A2 = 0.25 + math.sqrt(3) / 6


def slice_propagators(
    K: np.ndarray,
    diag: np.ndarray,
    d: DriveParams,
    t_starts: np.ndarray,
    h: float,
    sampling: Sampling = Sampling.LEFT_ENDPOINT,
) -> np.ndarray:
    """Stack of single-slice propagators for ``H(t) = K + cos(omega t) diag``.

    Slice ``q`` covers ``[t_starts[q], t_starts[q] + h]``.
    """
    sampling = Sampling(sampling)
    t_starts = np.asarray(t_starts, dtype=float)
    D = np.diag(diag).astype(np.complex128)

    def exps(k_weight, d_coeffs):
        G = k_weight * K[None, :, :] + d_coeffs[:, None, None] * D[None, :, :]
        return expm(-1j * h * G)

    if sampling is Sampling.LEFT_ENDPOINT:
        return exps(1.0, drive_phase_cos(d, t_starts))
    if sampling is Sampling.MIDPOINT:
        return exps(1.0, drive_phase_cos(d, t_starts + 0.5 * h))
    c1 = drive_phase_cos(d, t_starts + _C1 * h)
    c2 = drive_phase_cos(d, t_starts + _C2 * h)
    first = exps(0.5, _A2 * c1 + _A1 * c2)
    second = exps(0.5, _A1 * c1 + _A2 * c2)
    return second @ first


def _ordered_product(steps: np.ndarray) -> np.ndarray:
    U = np.eye(steps.shape[-1], dtype=np.complex128)
    for S in steps:
        U = S @ U
    return U


def one_period_propagator(
    p: LatticeParams,
    d: DriveParams,
    c: PropagatorConfig = PropagatorConfig(),
    profile: HoppingProfile | None = None,
) -> np.ndarray:
    """``U(T, 0) = U_Q ... U_1`` from ``Q`` exponential slices of width ``T/Q``."""
    h = d.period / c.Q
    K = hopping_matrix(p, profile)
    diag = potential_diagonal(p)
    U = np.eye(p.N, dtype=np.complex128)
    chunk = 4096
    for start in range(0, c.Q, chunk):
        q = np.arange(start, min(start + chunk, c.Q))
        U = _ordered_product(slice_propagators(K, diag, d, q * h, h, c.sampling)) @ U
    return U


def quasi_energies_propagator(
    p: LatticeParams,
    d: DriveParams,
    c: PropagatorConfig = PropagatorConfig(),
    profile: HoppingProfile | None = None,
    *,
    tol: Tolerances = DEFAULT_TOL,
) -> FloquetResult:
    """Eigen-decompose ``H_F = (i/T) log U(T, 0)``."""
    U = one_period_propagator(p, d, c, profile)
    try:
        X = logm_principal(U, tol=tol)
        shifted = False
    except BranchCutError:
        X = logm_branch_shifted(U, tol=tol)
        shifted = True
    HF = (1j / d.period) * X
    er = eig_general(HF, left=True, tol=tol)
    eps = fold(er.values, d.omega)
    order = np.lexsort((eps.imag, eps.real))
    return FloquetResult(
        quasi_energies=np.asarray(eps[order], dtype=complex),
        modes=er.vectors[:, order],
        method=Method.PROPAGATOR,
        omega=d.omega,
        left_modes=er.left_vectors[:, order],
        knobs={"Q": c.Q, "sampling": c.sampling.value, "branch_shifted": shifted},
    )


def quasi_energies(
    p: LatticeParams,
    d: DriveParams,
    method: Method | str = Method.PROPAGATOR,
    *,
    sambe: SambeConfig = SambeConfig(),
    propagator: PropagatorConfig = PropagatorConfig(),
    profile: HoppingProfile | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> FloquetResult:
    if Method(method) is Method.SAMBE:
        return quasi_energies_sambe(p, d, sambe, profile, tol=tol)
    return quasi_energies_propagator(p, d, propagator, profile, tol=tol)


def converge_propagator(
    p: LatticeParams,
    d: DriveParams,
    target: float,
    *,
    Q0: int = 1024,
    Q_max: int = 2**16,
    sampling: Sampling = Sampling.CFM4,
    profile: HoppingProfile | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[FloquetResult, float]:
    """Double ``Q`` until successive spectra agree (mod omega) within ``target``.

    Returns the finer result and the last observed change.
    """
    prev = quasi_energies_propagator(p, d, PropagatorConfig(Q0, sampling), profile, tol=tol)
    Q = Q0
    while True:
        Q *= 2
        cur = quasi_energies_propagator(p, d, PropagatorConfig(Q, sampling), profile, tol=tol)
        change = fold_distance(prev.quasi_energies, cur.quasi_energies, d.omega)
        if change < target or Q >= Q_max:
            return cur, change
        prev = cur


def converge_sambe(
    p: LatticeParams,
    d: DriveParams,
    target: float,
    *,
    M0: int | None = None,
    step: int = 4,
    M_max: int = 400,
    profile: HoppingProfile | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[FloquetResult, float]:
    """Grow the photon cutoff by ``step`` until the spectrum moves less than ``target``."""
    M = default_photon_cutoff(p, d, profile) if M0 is None else M0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SambeLeakageWarning)
        prev = quasi_energies_sambe(p, d, SambeConfig(M), profile, tol=tol)
        while True:
            M += step
            cur = quasi_energies_sambe(p, d, SambeConfig(M), profile, tol=tol)
            change = fold_distance(prev.quasi_energies, cur.quasi_energies, d.omega)
            if change < target or M >= M_max:
                return cur, change
            prev = cur
