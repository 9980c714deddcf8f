"""GBDT recursions: ``Pi_k``, ``S_k``, the potentials ``C_k`` and ``R_k``/``Q_k``.

Two families of quantities are kept side by side.

*Raw* sequences follow the defining recursions literally::

    Pi_{k+1} = Pi_k + i A^{-1} Pi_k j
    S_{k+1}  = S_k + A^{-1} S_k A^{-*} + A^{-1} Pi_k M Pi_k^* A^{-*}

(``M = I_m`` self-adjoint, ``M = j`` skew).  ``S_k`` grows geometrically and
at different rates along different eigen-directions of ``A``; its condition
number reaches ~1e17 around k = 40 for generic triples of size n = 4, so
``S_k`` is never inverted directly.

*Scaled* quantities use ``R_k = P^{-k} S_k P^{-k*}`` with ``P = I + i A^{-1}``
and ``G = (A + iI)^{-1}(A - iI)``.  Given the matrix identity, ``R_k`` obeys

    self-adjoint:  R_{k+1} = R_k + 2 B G^k th2 th2^* G^{k*} B^*
    skew:          R_{k+1} = G R_k G^* + 2 B th1 th1^* B^*

with ``B = (A + iI)^{-1}``, and stays bounded.  Its conditioning can still
be poor (for the skew kind ``R_k`` tends to a gramian of ``(G, B th1)``), so
``R_k`` is carried as a triangular factor updated in square-root form.  Every
product ``Pi_k^* S_k^{-1} X Pi_k`` (``X`` commuting with ``A``) equals
``L_k^* R_k^{-1} X L_k`` with ``L_k = [th1, G^k th2]``; the potentials and all
transfer-matrix values are computed from that form.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr, solve_triangular

from .errors import ConditioningError, ConvergenceError, DimensionError, PoleError, SingularEquationError
from .matcore import DEFAULT_TOL, adjoint, as_matrix, hermitian_part, is_positive_definite, opnorm
from .triples import ParameterTriple, SystemKind, _identity_residual

__all__ = [
    "DEFAULT_HORIZON",
    "GbdtSequence",
    "LimitPair",
    "advance_pi",
    "advance_s",
    "build_sequence",
    "potentials",
    "rq_matrices",
    "rq_increment",
    "limits",
    "g_matrix",
]

DEFAULT_HORIZON = 40
_POLE_MARGIN = 1e-6
_RAW_LIMIT = 1e150


def _solve_a(A, X):
    try:
        return np.linalg.solve(A, X)
    except np.linalg.LinAlgError as exc:
        raise SingularEquationError("A is singular") from exc


def advance_pi(Pi_k, A, sig):
    """One step ``Pi_{k+1} = Pi_k + i A^{-1} Pi_k j`` (same for both kinds)."""
    Pi_k = np.asarray(Pi_k, dtype=np.complex128)
    A = np.asarray(A, dtype=np.complex128)
    if Pi_k.shape != (A.shape[0], sig.m):
        raise DimensionError(f"Pi_k must have shape {(A.shape[0], sig.m)}, got {Pi_k.shape}")
    return Pi_k + 1j * _solve_a(A, Pi_k) * sig.signs[None, :]


def advance_s(S_k, Pi_k, A, kind, sig):
    """One step of the ``S`` recursion, Hermitian-symmetrized."""
    kind = SystemKind.parse(kind)
    S_k = np.asarray(S_k, dtype=np.complex128)
    Pi_k = np.asarray(Pi_k, dtype=np.complex128)
    A = np.asarray(A, dtype=np.complex128)
    if kind is SystemKind.SELF_ADJOINT:
        inner = Pi_k @ adjoint(Pi_k)
    else:
        inner = (Pi_k * sig.signs[None, :]) @ adjoint(Pi_k)
    # A^{-1} X A^{-*} = (A^{-1} (A^{-1} X)^*)^* for Hermitian X
    T = S_k + inner
    step = adjoint(_solve_a(A, adjoint(_solve_a(A, T))))
    return hermitian_part(S_k + step)


def g_matrix(A, variant="G"):
    """Cayley-type transforms ``G = (I+iA^{-1})^{-1}(I-iA^{-1})`` and ``G~ = (A-iI)^{-1}(A+iI)``.

    ``G~`` is the inverse of ``G``.  Both need ``+-i`` off the spectrum of `A`.
    """
    A = as_matrix(A, "A")
    n = A.shape[0]
    eye = np.eye(n)
    eig = np.linalg.eigvals(A)
    margin = _POLE_MARGIN * max(1.0, opnorm(A))
    if variant == "G":
        if np.min(np.abs(eig + 1j)) <= margin or np.min(np.abs(eig)) <= margin:
            raise PoleError("-i or 0 is (numerically) an eigenvalue of A")
        Ainv = np.linalg.inv(A)
        return np.linalg.solve(eye + 1j * Ainv, eye - 1j * Ainv)
    if variant in ("G_tilde", "Gt"):
        if np.min(np.abs(eig - 1j)) <= margin:
            raise PoleError("i is (numerically) an eigenvalue of A")
        return np.linalg.solve(A - 1j * eye, A + 1j * eye)
    raise ValueError(f"unknown variant {variant!r}")


@dataclass
class _ScaledPath:
    G: np.ndarray
    Gk: list
    R: list
    R_chol: list


def _triangular_update(F, extra):
    """Lower-triangular ``F'`` with ``F' F'^* = F F^* + extra extra^*``.

    The factor is obtained from a QR decomposition of ``[F, extra]^*`` and is
    never formed from the product, so it carries about twice as many correct
    digits as a Cholesky factorization of the assembled matrix.
    """
    T = qr(adjoint(np.hstack([F, extra])), mode="r")[0][: F.shape[0]]
    # fix the phases so that the diagonal is real and positive
    d = np.diag(T)
    ph = np.where(d == 0, 1.0, d / np.where(d == 0, 1.0, np.abs(d)))
    return adjoint(T / ph[:, None])


def _scaled_path(t, K, tol=DEFAULT_TOL):
    """``G^k``, ``R_k`` and lower-triangular factors of ``R_k`` for ``k = 0..K+1``.

    The factors are propagated in square-root form::

        self-adjoint:  F_{k+1} F_{k+1}^* = F_k F_k^* + 2 B G^k th2 (...)^*
        skew:          F_{k+1} F_{k+1}^* = G F_k (G F_k)^* + 2 B th1 (...)^*

    and ``R_k = F_k F_k^*`` is assembled only for reporting.
    """
    n = t.n
    eye = np.eye(n)
    G = g_matrix(t.A, "G")
    B = np.linalg.inv(t.A + 1j * eye)
    th1, th2 = t.theta1, t.theta2
    ok, F = is_positive_definite(t.S0, tol)
    if not ok:
        raise ConditioningError("S_0 is not numerically positive definite", step=0)
    Gk = [eye.astype(np.complex128)]
    chol = [F.astype(np.complex128)]
    root2 = np.sqrt(2.0)
    for k in range(K + 1):
        if t.kind is SystemKind.SELF_ADJOINT:
            F = _triangular_update(F, root2 * (B @ Gk[k] @ th2))
        else:
            F = _triangular_update(G @ F, root2 * (B @ th1))
        d = np.abs(np.diag(F))
        if np.min(d) <= tol * np.max(d):
            raise ConditioningError(f"S_{k + 1} lost positivity numerically", step=k + 1)
        chol.append(F)
        Gk.append(G @ Gk[k])
    R = [hermitian_part(L @ adjoint(L)) for L in chol]
    R[0] = hermitian_part(np.asarray(t.S0, dtype=np.complex128))
    return _ScaledPath(G, Gk, R, chol)


def _chol_solve(L, X):
    Y = solve_triangular(L, X, lower=True)
    return solve_triangular(adjoint(L), Y, lower=False)


def _potentials_from_path(t, path, K):
    th1, th2 = t.theta1, t.theta2
    base = np.eye(t.sig.m) if t.kind is SystemKind.SELF_ADJOINT else t.sig.j
    Ms = []
    for k in range(K + 2):
        L = np.hstack([th1, path.Gk[k] @ th2])
        Y = solve_triangular(path.R_chol[k], L, lower=True)
        Ms.append(hermitian_part(adjoint(Y) @ Y))
    C = [hermitian_part(base + Ms[k] - Ms[k + 1]) for k in range(K + 1)]
    return np.array(C)


def potentials(t, K, tol=DEFAULT_TOL):
    """Potentials ``C_0..C_K`` from the scaled path only (cheap, any horizon)."""
    path = _scaled_path(t, K, tol)
    return _potentials_from_path(t, path, K)


@dataclass(eq=False)
class GbdtSequence:
    """Cached sequences for ``k = 0..K`` (``Pi``, ``S``, ``R`` up to ``K+1``).

    Attributes
    ----------
    Pi, S : ndarray
        Raw recursions, shape ``(K+2, n, m)`` and ``(K+2, n, n)``.
    R : ndarray
        Scaled matrices ``R_k``, shape ``(K+2, n, n)``.
    C : ndarray
        Potentials, shape ``(K+1, m, m)``.
    identity_residuals : ndarray
        Relative residuals of ``A S_k - S_k A^* - i Pi_k M Pi_k^*`` for the raw
        sequences (``M = j`` self-adjoint, ``M = I`` skew).  ``NaN`` from the
        first step where the raw recursion overflows; ``Pi`` and ``S`` are
        ``NaN`` there too, while ``R`` and ``C`` remain valid.
    s_condition : ndarray
        2-norm condition numbers of the raw ``S_k``, for diagnostics only
        (``inf`` past an overflow).
    """

    source: ParameterTriple
    K: int
    Pi: np.ndarray
    S: np.ndarray
    R: np.ndarray
    C: np.ndarray
    identity_residuals: np.ndarray
    s_condition: np.ndarray
    G: np.ndarray
    Gk: np.ndarray
    _R_chol: list = field(repr=False)

    def __post_init__(self):
        for arr in (self.Pi, self.S, self.R, self.C, self.identity_residuals,
                    self.s_condition, self.G, self.Gk):
            arr.setflags(write=False)

    @property
    def kind(self):
        return self.source.kind

    @property
    def sig(self):
        return self.source.sig

    def _check_k(self, k, upper=None):
        upper = self.K + 1 if upper is None else upper
        if not 0 <= k <= upper:
            raise IndexError(f"k={k} outside stored range 0..{upper}")

    def scaled_pi(self, k):
        """``L_k = P^{-k} Pi_k = [th1, G^k th2]``."""
        self._check_k(k)
        return np.hstack([self.source.theta1, self.Gk[k] @ self.source.theta2])

    def solve_r(self, k, X):
        """``R_k^{-1} X`` through the Cholesky factor of ``R_k``."""
        self._check_k(k)
        return _chol_solve(self._R_chol[k], X)

    def r_inv(self, k):
        return hermitian_part(self.solve_r(k, np.eye(self.source.n)))

    def q_inv(self, k):
        """``Q_k^{-1} = G^{k*} R_k^{-1} G^k``."""
        Gk = self.Gk[k]
        return hermitian_part(adjoint(Gk) @ self.solve_r(k, Gk))

    def kernel(self, k, X=None):
        """``Pi_k^* S_k^{-1} X Pi_k`` for ``X`` commuting with ``A`` (default ``I``)."""
        L = self.scaled_pi(k)
        XL = L if X is None else X @ L
        return adjoint(L) @ self.solve_r(k, XL)


def build_sequence(t, K=DEFAULT_HORIZON, tol=DEFAULT_TOL):
    """Run the GBDT recursions up to horizon `K`.

    Raises
    ------
    ConditioningError
        If some ``S_k`` (certified through ``R_k``) stops being numerically
        positive definite; the offending step is attached as ``.step``.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    path = _scaled_path(t, K, tol)
    sig = t.sig
    Pi = [np.array(t.Pi0, dtype=np.complex128)]
    S = [hermitian_part(t.S0).astype(np.complex128)]
    # the raw sequences grow geometrically; past _RAW_LIMIT their residual
    # products would overflow, so the remaining steps are stored as NaN
    while len(Pi) < K + 2 and max(np.abs(Pi[-1]).max() ** 2, np.abs(S[-1]).max()) < _RAW_LIMIT:
        k = len(Pi) - 1
        Pi.append(advance_pi(Pi[k], t.A, sig))
        S.append(advance_s(S[k], Pi[k], t.A, t.kind, sig))
    finite = len(Pi)
    Pi += [np.full_like(Pi[0], np.nan)] * (K + 2 - finite)
    S += [np.full_like(S[0], np.nan)] * (K + 2 - finite)
    middle = t.middle
    resid = np.array([_identity_residual(t.A, S[k], Pi[k], middle) if k < finite else np.nan
                      for k in range(K + 2)])
    cond = np.array([np.linalg.cond(S[k]) if k < finite else np.inf for k in range(K + 2)])
    C = _potentials_from_path(t, path, K)
    return GbdtSequence(
        source=t, K=K, Pi=np.array(Pi), S=np.array(S), R=np.array(path.R), C=C,
        identity_residuals=resid, s_condition=cond, G=path.G, Gk=np.array(path.Gk),
        _R_chol=path.R_chol,
    )


def rq_matrices(seq, k, method="scaled"):
    """Return ``(R_k, Q_k)``.

    ``method="scaled"`` uses the well-conditioned ``R_k`` and
    ``Q_k = G~^k R_k G~^{k*}``; ``method="definition"`` applies
    ``R_k = P^{-k} S_k P^{-k*}``, ``Q_k = Pb^{-k} S_k Pb^{-k*}``
    (``Pb = I - i A^{-1}``) to the raw ``S_k`` and is only accurate while
    ``S_k`` is well conditioned (small k).
    """
    seq._check_k(k)
    A = seq.source.A
    n = seq.source.n
    eye = np.eye(n)
    if method == "scaled":
        Gt = g_matrix(A, "G_tilde")
        Gtk = np.linalg.matrix_power(Gt, k)
        Rk = np.array(seq.R[k])
        return Rk, hermitian_part(Gtk @ Rk @ adjoint(Gtk))
    if method == "definition":
        g_matrix(A, "G")
        g_matrix(A, "G_tilde")
        Ainv = np.linalg.inv(A)
        Pk = np.linalg.matrix_power(eye + 1j * Ainv, k)
        Pbk = np.linalg.matrix_power(eye - 1j * Ainv, k)
        Sk = seq.S[k]
        Rk = adjoint(np.linalg.solve(Pk, adjoint(np.linalg.solve(Pk, Sk))))
        Qk = adjoint(np.linalg.solve(Pbk, adjoint(np.linalg.solve(Pbk, Sk))))
        return hermitian_part(Rk), hermitian_part(Qk)
    raise ValueError(f"unknown method {method!r}")


def rq_increment(t, k):
    """Explicit self-adjoint increments ``(R_{k+1} - R_k, Q_{k+1} - Q_k)``.

    ``R``: ``2 P^{-k-1} A^{-1} Pb^k th2 th2^* (...)^*`` (rank <= m2);
    ``Q``: ``2 Pb^{-k-1} A^{-1} P^k th1 th1^* (...)^*`` (rank <= m1).
    """
    n = t.n
    eye = np.eye(n)
    Ainv = np.linalg.inv(t.A)
    P = eye + 1j * Ainv
    Pb = eye - 1j * Ainv
    vR = np.linalg.solve(np.linalg.matrix_power(P, k + 1),
                         Ainv @ np.linalg.matrix_power(Pb, k) @ t.theta2)
    vQ = np.linalg.solve(np.linalg.matrix_power(Pb, k + 1),
                         Ainv @ np.linalg.matrix_power(P, k) @ t.theta1)
    return 2.0 * vR @ adjoint(vR), 2.0 * vQ @ adjoint(vQ)


@dataclass
class LimitPair:
    """Limits ``kappa_R = lim R_k^{-1}`` and ``kappa_Q = lim Q_k^{-1}``."""

    kappa_R: np.ndarray
    kappa_Q: np.ndarray
    iterations: int
    increment_R: float
    increment_Q: float
    # skew only: ||Q_k^{-1}|| and ||Q_k^{-1} G~^k th1|| at the final k
    q_inv_norm: float = float("nan")
    q_inv_gt_theta1_norm: float = float("nan")


def limits(t, tol=1e-12, k_max=200):
    """Iterate ``R_k^{-1}`` and ``Q_k^{-1}`` until successive increments drop below `tol`.

    Increments are absolute, except for ``R_k^{-1}`` of the skew kind: there
    ``R_k`` tends to a gramian of ``(G, B th1)`` which is nearly singular when
    ``m1`` is small, so that increment is taken relative to
    ``max(1, ||R_k^{-1}||)``.

    For the skew kind the loop also waits until ``||Q_k^{-1}||`` and
    ``||Q_k^{-1} G~^k th1||`` are below `tol` (both tend to zero).  The second
    quantity is evaluated as ``G^{k*} R_k^{-1} th1``, which is the same matrix
    because ``G~ = G^{-1}``; forming ``G~^k`` explicitly overflows the
    attainable accuracy long before the limit is reached.

    Raises
    ------
    ConvergenceError
        If the criteria are not met by `k_max`.
    """
    path = _scaled_path(t, k_max, DEFAULT_TOL)
    n = t.n
    eye = np.eye(n)

    def rinv(k):
        return hermitian_part(_chol_solve(path.R_chol[k], eye))

    def qinv(k):
        Gk = path.Gk[k]
        return hermitian_part(adjoint(Gk) @ _chol_solve(path.R_chol[k], Gk))

    r_prev, q_prev = rinv(0), qinv(0)
    inc_r = inc_q = np.inf
    qn = qg = float("nan")
    for k in range(1, k_max + 1):
        r_cur, q_cur = rinv(k), qinv(k)
        inc_r = opnorm(r_cur - r_prev)
        if t.kind is SystemKind.SKEW:
            inc_r /= max(1.0, opnorm(r_cur))
        inc_q = opnorm(q_cur - q_prev)
        done = inc_r < tol and inc_q < tol
        if t.kind is SystemKind.SKEW:
            qn = opnorm(q_cur)
            qg = opnorm(adjoint(path.Gk[k]) @ _chol_solve(path.R_chol[k], t.theta1))
            done = done and qn < tol and qg < tol
        if done:
            return LimitPair(r_cur, q_cur, k, inc_r, inc_q, qn, qg)
        r_prev, q_prev = r_cur, q_cur
    raise ConvergenceError(
        f"R_k^-1 / Q_k^-1 did not settle within k_max={k_max} "
        f"(increments {inc_r:.3e}, {inc_q:.3e})",
        increments=(inc_r, inc_q),
    )
