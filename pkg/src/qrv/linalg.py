"""Dense complex/Hermitian matrix kernels.

Everything downstream works with plain ``numpy`` arrays; the helpers here
enforce the invariants (finite entries, exact Hermitian symmetry, PSD
within tolerance, unit trace for states) at the point of construction.
Eigen-based operations are backed by LAPACK (``numpy.linalg.eigh``),
which converges unconditionally for Hermitian input.
"""

from __future__ import annotations

import numpy as np

from .errors import DimMismatch, FullRankRequired, MatrixNotPsd, NotHermitian

# Relative PSD tolerance inherited by all downstream modules.
PSD_TOL = 1e-9

# Absolute scale below which an eigenvalue of a state counts as zero.
FULL_RANK_TOL = 1e-12


def as_operator(A) -> np.ndarray:
    """Validate and return a finite square complex matrix."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {A.shape}")
    if not (np.all(np.isfinite(A.real)) and np.all(np.isfinite(A.imag))):
        raise NotHermitian("matrix contains NaN or Inf entries")
    return A


def hermitian_part(A) -> np.ndarray:
    """Return (A + A*)/2, exactly Hermitian in floating point."""
    A = as_operator(A)
    return (A + A.conj().T) / 2


def is_hermitian(A, tol: float = 1e-12) -> bool:
    A = as_operator(A)
    scale = 1.0 + np.abs(A).max(initial=0.0)
    return bool(np.abs(A - A.conj().T).max(initial=0.0) <= tol * scale)


def as_hermitian(A, tol: float = 1e-12) -> np.ndarray:
    """Validate Hermitian symmetry and return the exactly mirrored matrix."""
    A = as_operator(A)
    if not is_hermitian(A, tol):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return (A + A.conj().T) / 2


def hermitian_eigen(A):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in
    descending order and orthonormal eigenvector columns, so that
    ``A = V @ diag(lam) @ V.conj().T``.
    """
    A = as_hermitian(A)
    lam, V = np.linalg.eigh(A)
    return lam[::-1].copy(), V[:, ::-1].copy()


def operator_norm(A) -> float:
    """Spectral norm: largest singular value of A."""
    A = as_operator(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def trace_norm(A) -> float:
    """Trace norm; for Hermitian A this is the sum of |eigenvalues|."""
    A = as_operator(A)
    return float(np.linalg.svd(A, compute_uv=False).sum())


def lambda_min(A) -> float:
    A = as_hermitian(A)
    return float(np.linalg.eigvalsh(A)[0])


def is_psd(A, tol: float = PSD_TOL) -> bool:
    """True iff lambda_min(A) >= -tol * (1 + ||A||)."""
    A = as_hermitian(A)
    lam = np.linalg.eigvalsh(A)
    return bool(lam[0] >= -tol * (1.0 + abs(lam[-1]) + abs(lam[0])))


def psd_project(A, tol: float = PSD_TOL) -> np.ndarray:
    """Clamp negative eigenvalues of a Hermitian matrix to zero."""
    A = hermitian_part(A)
    lam, V = np.linalg.eigh(A)
    lam = np.clip(lam, 0.0, None)
    return hermitian_part((V * lam) @ V.conj().T)


def psd_sqrt(A, tol: float = PSD_TOL) -> np.ndarray:
    """Positive square root of a PSD matrix.

    Eigenvalues in ``[-tol*(1+||A||), 0)`` are clamped to zero: derivatives
    computed from data may be PSD only up to roundoff.  Raises
    :class:`MatrixNotPsd` for genuinely indefinite input.
    """
    A = as_hermitian(A)
    lam, V = np.linalg.eigh(A)
    scale = 1.0 + max(abs(lam[0]), abs(lam[-1]))
    if lam[0] < -tol * scale:
        raise MatrixNotPsd(f"lambda_min = {lam[0]:.3e} below -tol*(1+||A||)")
    lam = np.clip(lam, 0.0, None)
    return hermitian_part((V * np.sqrt(lam)) @ V.conj().T)


def positive_parts(A):
    """Jordan decomposition (A_plus, A_minus, |A|) of a Hermitian matrix.

    A = A_plus - A_minus, |A| = A_plus + A_minus, both parts PSD and
    mutually orthogonal (A_plus @ A_minus = 0 up to roundoff).
    """
    A = as_hermitian(A)
    lam, V = np.linalg.eigh(A)
    pos = hermitian_part((V * np.clip(lam, 0.0, None)) @ V.conj().T)
    neg = hermitian_part((V * np.clip(-lam, 0.0, None)) @ V.conj().T)
    return pos, neg, hermitian_part(pos + neg)


def trace_pairing(t, A) -> complex:
    """The duality pairing tr(t @ A)."""
    t = as_operator(t)
    A = as_operator(A)
    if t.shape != A.shape:
        raise DimMismatch(f"shapes {t.shape} and {A.shape} differ")
    return complex(np.trace(t @ A))


def as_state(rho, trace_tol: float = 1e-12, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Validate a density operator: Hermitian, PSD, unit trace."""
    rho = as_hermitian(rho)
    if not is_psd(rho, psd_tol):
        raise MatrixNotPsd("state is not positive semidefinite")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > trace_tol:
        raise MatrixNotPsd(f"state trace {tr!r} differs from 1 beyond {trace_tol}")
    return rho


def is_full_rank_state(rho) -> bool:
    rho = as_hermitian(rho)
    lam = np.linalg.eigvalsh(rho)
    return bool(lam[0] > FULL_RANK_TOL * max(1.0, lam[-1]))


def require_full_rank_state(rho) -> np.ndarray:
    rho = as_state(rho)
    if not is_full_rank_state(rho):
        raise FullRankRequired("state is singular; a full-rank state is required")
    return rho


def maximally_mixed(d: int) -> np.ndarray:
    """The default full-rank state I/d."""
    return np.eye(d, dtype=complex) / d
