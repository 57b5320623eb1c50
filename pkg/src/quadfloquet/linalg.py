"""Dense complex linear algebra used by the Floquet machinery.

Eigendecompositions are delegated to LAPACK (Hessenberg reduction followed by
shifted QR for general matrices, tridiagonal reduction for Hermitian ones) and
wrapped with deterministic ordering and residual checks. The matrix
exponential is a scaling-and-squaring [13/13] Pade implementation that also
accepts stacks of matrices, which is what makes time slicing cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "LinalgError",
    "ConvergenceError",
    "NotHermitianError",
    "BranchCutError",
    "ExpmOverflowError",
    "EigResult",
    "as_cmatrix",
    "eig_general",
    "eig_hermitian",
    "expm",
    "logm_principal",
    "logm_branch_shifted",
]


class LinalgError(ArithmeticError):
    """Base class for failures of the dense linear algebra layer."""


class ConvergenceError(LinalgError):
    pass


class NotHermitianError(LinalgError, ValueError):
    pass


class BranchCutError(LinalgError):
    """An eigenvalue sits on the branch cut of the principal logarithm.

    Retry with :func:`logm_branch_shifted`, which rotates the spectrum off the
    negative real axis before taking the logarithm.
    """


class ExpmOverflowError(LinalgError, OverflowError):
    pass


@dataclass(frozen=True, eq=False)
class EigResult:
    """Eigenvalues with unit-norm right eigenvectors stored column-wise.

    ``left_vectors``, when present, are scaled so that
    ``left_vectors.conj().T @ vectors`` is the identity.
    """

    values: np.ndarray
    vectors: np.ndarray
    left_vectors: np.ndarray | None = None


def as_cmatrix(A) -> np.ndarray:
    """Return ``A`` as a finite, square complex128 array (copy)."""
    M = np.array(A, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def _sort_order(values: np.ndarray) -> np.ndarray:
    # real part first, imaginary part breaks ties
    return np.lexsort((values.imag, values.real))


def _check_residual(A, values, vectors, tol: float) -> None:
    scale = max(np.linalg.norm(A, 2), np.finfo(float).tiny)
    res = np.linalg.norm(A @ vectors - vectors * values, axis=0).max() / scale
    if not res <= tol:
        raise ConvergenceError(
            f"eigensolver residual {res:.3e} exceeds {tol:.1e} for a "
            f"{A.shape[0]}x{A.shape[0]} matrix"
        )


def eig_general(A, *, left: bool = False, tol: Tolerances = DEFAULT_TOL) -> EigResult:
    """Eigendecomposition of a general complex matrix.

    Eigenvalues are ordered by real part, ties broken by imaginary part.
    With ``left=True`` the biorthogonal left partners are returned as the
    rows of ``inv(R)``, conjugate-transposed into columns.
    """
    A = as_cmatrix(A)
    n = A.shape[0]
    try:
        values, vectors = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"QR iteration failed for a {n}x{n} matrix: {exc}") from exc
    order = _sort_order(values)
    values = values[order]
    vectors = vectors[:, order]
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    _check_residual(A, values, vectors, tol.eig)

    left_vectors = None
    if left:
        try:
            left_vectors = np.linalg.inv(vectors).conj().T
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(
                f"eigenvector matrix of a {n}x{n} input is singular (defective matrix)"
            ) from exc
    return EigResult(values, vectors, left_vectors)


def eig_hermitian(A, *, tol: Tolerances = DEFAULT_TOL) -> EigResult:
    """Eigendecomposition of a Hermitian matrix: ascending real eigenvalues,
    orthonormal eigenvectors."""
    A = as_cmatrix(A)
    scale = np.linalg.norm(A)
    violation = np.linalg.norm(A - A.conj().T)
    if violation > tol.herm * max(scale, np.finfo(float).tiny):
        raise NotHermitianError(
            f"matrix is not Hermitian: ||A - A^H|| = {violation:.3e} "
            f"(||A|| = {scale:.3e})"
        )
    values, vectors = np.linalg.eigh(0.5 * (A + A.conj().T))
    return EigResult(values.astype(np.complex128), vectors)


# [13/13] Pade coefficients and the backward-error bound theta_13 (Higham 2005).
_PADE13 = np.array(
    [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ]
)
_THETA13 = 5.371920351148152
_MAX_SQUARINGS = 1024


def expm(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a [13/13] Pade approximant.

    ``A`` may be a single square matrix or a stack with shape ``(..., n, n)``;
    each matrix in a stack gets its own squaring count from its 1-norm.
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    shape = A.shape
    A = A.reshape((-1,) + shape[-2:])
    n = A.shape[-1]

    norms = np.abs(A).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        s = np.ceil(np.log2(np.maximum(norms, 1e-300) / _THETA13))
    s = np.maximum(s, 0).astype(int)
    if s.max(initial=0) > _MAX_SQUARINGS:
        raise ExpmOverflowError(f"expm: 1-norm {norms.max():.3e} is out of range")
    A = A / (2.0 ** s)[:, None, None]

    b = _PADE13
    ident = np.broadcast_to(np.eye(n, dtype=np.complex128), A.shape)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    R = np.linalg.solve(V - U, V + U)

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(s.max(initial=0)):
            mask = s > k
            R[mask] = R[mask] @ R[mask]

    if not np.all(np.isfinite(R)):
        raise ExpmOverflowError(
            f"expm overflowed (largest input 1-norm {norms.max():.3e})"
        )
    return R.reshape(shape)


def _branch_violations(U: np.ndarray, angle_tol: float) -> np.ndarray:
    lam = np.linalg.eigvals(U)
    return lam[np.pi - np.abs(np.angle(lam)) < angle_tol]


def logm_principal(U, *, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Principal matrix logarithm; eigenvalues of the result have imaginary
    part in (-pi, pi].

    Raises :class:`BranchCutError` when an eigenvalue of ``U`` lies within
    ``tol.branch_angle`` of the negative real axis.
    """
    U = as_cmatrix(U)
    lam = np.linalg.eigvals(U)
    if np.min(np.abs(lam)) <= np.finfo(float).eps * max(np.abs(lam).max(), 1.0):
        raise LinalgError("logm: matrix is numerically singular")
    bad = _branch_violations(U, tol.branch_angle)
    if bad.size:
        raise BranchCutError(
            f"logm: eigenvalue {bad[0]:.6g} on the negative real axis; "
            "retry with logm_branch_shifted"
        )
    X = scipy.linalg.logm(U)
    if not np.all(np.isfinite(X)):
        raise LinalgError("logm produced non-finite entries")
    return np.asarray(X, dtype=np.complex128)


def logm_branch_shifted(U, *, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Logarithm of ``U`` after rotating its spectrum by ``-tol.branch_shift``.

    Eigenvalues sitting at angle ``pi`` map to logarithm eigenvalues with
    imaginary part ``pi`` (the closed end of the principal interval).
    """
    U = as_cmatrix(U)
    delta = tol.branch_shift
    X = logm_principal(U * np.exp(-1j * delta), tol=tol)
    return X + 1j * delta * np.eye(U.shape[0])
