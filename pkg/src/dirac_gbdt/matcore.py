"""Dense complex-matrix helpers.

Everything here works on small dense ``complex128`` arrays (n up to ~20).
Tolerances are relative to matrix norms unless stated otherwise.
"""

import numpy as np

from .errors import DimensionError, SingularEquationError

DEFAULT_TOL = 1e-10

__all__ = [
    "DEFAULT_TOL",
    "as_matrix",
    "adjoint",
    "hermitian_part",
    "is_positive_definite",
    "solve_sylvester",
    "spectrum",
    "controllability_rank",
    "opnorm",
]


def as_matrix(M, name="matrix"):
    """Return `M` as a 2-D complex128 array with finite entries."""
    M = np.array(M, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DimensionError(f"{name} has non-finite entries")
    return M


def _square(M, name="matrix"):
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    return M


def adjoint(M):
    return np.conj(np.swapaxes(M, -1, -2))


def hermitian_part(M):
    return 0.5 * (M + adjoint(M))


def opnorm(M):
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(M, 2))


def is_positive_definite(M, tol=DEFAULT_TOL):
    """Check Hermitian positive definiteness.

    Parameters
    ----------
    M : array_like, shape (n, n)
    tol : float
        Relative tolerance used both for the Hermiticity defect and for the
        smallest admissible Cholesky pivot (``tol * ||M||``).

    Returns
    -------
    ok : bool
    factor : ndarray or None
        Lower-triangular ``L`` with ``L @ L^* = (M + M^*)/2`` when ``ok``.
    """
    M = _square(M)
    scale = opnorm(M)
    if scale == 0.0:
        return False, None
    if np.linalg.norm(M - adjoint(M), 2) > tol * scale:
        return False, None
    try:
        L = np.linalg.cholesky(hermitian_part(M))
    except np.linalg.LinAlgError:
        return False, None
    pivots = np.abs(np.diag(L)) ** 2
    if np.min(pivots) <= tol * scale:
        return False, None
    return True, L


def solve_sylvester(A, B, C, tol=DEFAULT_TOL):
    """Solve ``A X - X B = C`` by vectorization.

    Builds the ``n^2 x n^2`` Kronecker system, so cost is O(n^6); meant for
    desk-scale problems only.

    Raises
    ------
    SingularEquationError
        If some eigenvalue of `A` lies within ``tol * (||A|| + ||B||)`` of an
        eigenvalue of `B`.
    """
    A = _square(A, "A")
    B = _square(B, "B")
    C = as_matrix(C, "C")
    n, p = A.shape[0], B.shape[0]
    if C.shape != (n, p):
        raise DimensionError(f"C must have shape {(n, p)}, got {C.shape}")
    scale = opnorm(A) + opnorm(B)
    gap = np.min(np.abs(spectrum(A)[:, None] - spectrum(B)[None, :]))
    if gap <= tol * max(scale, 1.0):
        raise SingularEquationError(
            f"spectra of A and B overlap (eigenvalue gap {gap:.3e})"
        )
    # column-major vec: vec(AX) = (I kron A) vec X, vec(XB) = (B^T kron I) vec X
    K = np.kron(np.eye(p), A) - np.kron(B.T, np.eye(n))
    x = np.linalg.solve(K, C.reshape(-1, order="F"))
    return x.reshape((n, p), order="F")


def spectrum(M):
    """Eigenvalues of a square matrix, with multiplicity, unordered."""
    return np.linalg.eigvals(_square(M))


def controllability_rank(A, T, tol=DEFAULT_TOL):
    """Numerical rank of the Krylov matrix ``[T, AT, ..., A^{n-1} T]``."""
    A = _square(A, "A")
    T = as_matrix(T, "T")
    n = A.shape[0]
    if T.shape[0] != n:
        raise DimensionError(f"T must have {n} rows, got {T.shape[0]}")
    blocks = [T]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    sv = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))
