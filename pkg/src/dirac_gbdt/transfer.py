"""Transfer matrix function, fundamental and Jost-type solutions.

Conventions: ``z`` is the spectral parameter of the Dirac system.  The
self-adjoint one-step matrix is ``I + i z j C_k`` and the transfer matrix is
evaluated at ``lambda = -1/z``; the skew one-step matrix is
``I + (i/z) C_k`` and the transfer matrix is evaluated at ``lambda = -z``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PoleError
from .gbdt import GbdtSequence
from .matcore import opnorm
from .triples import SystemKind

__all__ = [
    "POLE_MARGIN",
    "BlockDecomposition",
    "ChiPair",
    "split_blocks",
    "transfer_eval",
    "transfer_block_rep",
    "one_step",
    "fundamental_direct",
    "fundamental_closed",
    "fundamental_paths",
    "chi_functions",
    "jost_closed",
    "jost_residual",
    "y_closed",
]

POLE_MARGIN = 1e-6
_NORMALIZER_COND = 1e12


@dataclass
class BlockDecomposition:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def assemble(self):
        return np.block([[self.a, self.b], [self.c, self.d]])


def split_blocks(M, sig):
    """Partition an ``m x m`` matrix conformally with ``j``."""
    m1 = sig.m1
    return BlockDecomposition(M[:m1, :m1], M[:m1, m1:], M[m1:, :m1], M[m1:, m1:])


@dataclass
class ChiPair:
    chi1: np.ndarray
    chi2: np.ndarray


def _resolvent(A, lam):
    """``(A - lam I)^{-1}``, refusing points near the spectrum of `A`."""
    eig = np.linalg.eigvals(A)
    dist = float(np.min(np.abs(eig - lam)))
    if dist <= POLE_MARGIN * max(1.0, opnorm(A)):
        raise PoleError(f"lambda={lam} is within {dist:.2e} of the spectrum of A")
    return np.linalg.inv(A - lam * np.eye(A.shape[0]))


def transfer_eval(seq: GbdtSequence, k, lam, method="scaled"):
    """Transfer matrix ``w_A(k, lam)``.

    Self-adjoint: ``I - i j Pi_k^* S_k^{-1} (A - lam I)^{-1} Pi_k``;
    skew: the same without the ``j``.

    ``method="scaled"`` evaluates ``Pi_k^* S_k^{-1} X Pi_k`` as
    ``L_k^* R_k^{-1} X L_k`` (accurate for every stored k).
    ``method="direct"`` solves with the raw ``S_k`` and is only trustworthy
    while ``S_k`` is well conditioned.
    """
    t = seq.source
    X = _resolvent(t.A, complex(lam))
    if method == "scaled":
        core = seq.kernel(k, X)
    elif method == "direct":
        seq._check_k(k)
        Pi = seq.Pi[k]
        L = np.linalg.cholesky(seq.S[k])
        Y = np.linalg.solve(L, X @ Pi)
        core = np.linalg.solve(L, Pi).conj().T @ Y
    else:
        raise ValueError(f"unknown method {method!r}")
    m = t.sig.m
    if t.kind is SystemKind.SELF_ADJOINT:
        return np.eye(m) - 1j * t.sig.signs[:, None] * core
    return np.eye(m) - 1j * core


def _one_plus_zA_inv(A, z):
    if z == 0:
        return np.eye(A.shape[0], dtype=np.complex128)
    # (I + zA)^{-1} = (1/z)(A + I/z)^{-1}
    return _resolvent(A, -1.0 / z) / z


def transfer_block_rep(seq: GbdtSequence, k, z):
    """Block representation of the transfer matrix through ``R_k``, ``Q_k``, ``G^k``.

    Self-adjoint: the full ``m x m`` value of ``w_A(k, -1/z)``::

        I - i z j [[th1^* R^-1 Y th1,          th1^* R^-1 Y G^k th2],
                   [th2^* G^k* R^-1 Y th1,     th2^* Q^-1 Y th2   ]]

    with ``Y = (I + zA)^{-1}``.

    Skew: the ``m x m2`` column ``w_A(k, -z) [0; I]``::

        [0; I] - i [th1^* G~^{k*} Q^-1 Y th2; th2^* Q^-1 Y th2]

    with ``Y = (zI + A)^{-1}``.  ``G~^{k*} Q_k^{-1}`` is evaluated as
    ``R_k^{-1} G^k`` (identical since ``G~ = G^{-1}``).
    """
    t = seq.source
    A = t.A
    th1, th2 = t.theta1, t.theta2
    Gk = seq.Gk[k]
    Qinv = seq.q_inv(k)
    z = complex(z)
    if t.kind is SystemKind.SELF_ADJOINT:
        Y = _one_plus_zA_inv(A, z)
        top_l = th1.conj().T @ seq.solve_r(k, Y @ th1)
        top_r = th1.conj().T @ seq.solve_r(k, Y @ Gk @ th2)
        bot_l = (Gk @ th2).conj().T @ seq.solve_r(k, Y @ th1)
        bot_r = th2.conj().T @ Qinv @ Y @ th2
        blocks = np.block([[top_l, top_r], [bot_l, bot_r]])
        return np.eye(t.sig.m) - 1j * z * t.sig.signs[:, None] * blocks
    Y = _resolvent(A, -z)
    top = th1.conj().T @ seq.solve_r(k, Gk @ Y @ th2)
    bot = th2.conj().T @ Qinv @ Y @ th2
    col = np.zeros((t.sig.m, t.sig.m2), dtype=np.complex128)
    col[t.sig.m1:] = np.eye(t.sig.m2)
    return col - 1j * np.vstack([top, bot])


def one_step(kind, sig, C_k, z):
    """One-step matrix of the Dirac system at spectral parameter `z`."""
    m = sig.m
    if kind is SystemKind.SELF_ADJOINT:
        return np.eye(m) + 1j * z * sig.signs[:, None] * C_k
    if z == 0:
        raise PoleError("z = 0 is singular for the skew-self-adjoint system")
    return np.eye(m) + (1j / z) * C_k


def fundamental_direct(seq: GbdtSequence, k, z):
    """Fundamental solution at step `k` by multiplying one-step matrices (``W_0 = I``)."""
    seq._check_k(k, seq.K + 1)
    t = seq.source
    z = complex(z)
    if t.kind is SystemKind.SKEW and z == 0:
        raise PoleError("z = 0 is singular for the skew-self-adjoint system")
    W = np.eye(t.sig.m, dtype=np.complex128)
    for i in range(k):
        W = one_step(t.kind, t.sig, seq.C[i], z) @ W
    return W


def _free_power(t, z, k):
    """Diagonal of ``(I + i z j)^k`` (self-adjoint) or ``(I + (i/z) j)^k`` (skew)."""
    s = t.sig.signs
    if t.kind is SystemKind.SELF_ADJOINT:
        return (1.0 + 1j * z * s) ** k
    return (1.0 + 1j * s / z) ** k


def _lam(t, z):
    return -1.0 / z if t.kind is SystemKind.SELF_ADJOINT else -z


def _checked_inverse(M, what):
    c = np.linalg.cond(M)
    if not np.isfinite(c) or c > _NORMALIZER_COND:
        raise PoleError(f"{what} is not invertible at this point (cond {c:.2e})")
    return np.linalg.inv(M)


def fundamental_closed(seq: GbdtSequence, k, z):
    """Fundamental solution from the transfer matrix::

        W_k(z) = w_A(k, -1/z) (I + i z j)^k w_A(0, -1/z)^{-1}     (self-adjoint)
        w_k(z) = w_A(k, -z) (I + (i/z) j)^k w_A(0, -z)^{-1}       (skew)
    """
    t = seq.source
    z = complex(z)
    if z == 0:
        if t.kind is SystemKind.SKEW:
            raise PoleError("z = 0 is singular for the skew-self-adjoint system")
        return np.eye(t.sig.m, dtype=np.complex128)
    lam = _lam(t, z)
    wk = transfer_eval(seq, k, lam)
    w0_inv = _checked_inverse(transfer_eval(seq, 0, lam), "normalizer w_A(0, .)")
    return (wk * _free_power(t, z, k)[None, :]) @ w0_inv


def fundamental_paths(seq: GbdtSequence, K, z):
    """Both routes for ``k = 0..K`` at one point, in a single pass each.

    Returns
    -------
    direct, closed : ndarray, shape (K+1, m, m)
        Same values as :func:`fundamental_direct` and :func:`fundamental_closed`
        but sharing the running product, the resolvent and the normalizer.
    """
    seq._check_k(K)
    t = seq.source
    z = complex(z)
    if z == 0:
        if t.kind is SystemKind.SKEW:
            raise PoleError("z = 0 is singular for the skew-self-adjoint system")
        eye = np.broadcast_to(np.eye(t.sig.m, dtype=np.complex128), (K + 1, t.sig.m, t.sig.m))
        return eye.copy(), eye.copy()
    m = t.sig.m
    direct = np.empty((K + 1, m, m), dtype=np.complex128)
    direct[0] = np.eye(m)
    for i in range(K):
        direct[i + 1] = one_step(t.kind, t.sig, seq.C[i], z) @ direct[i]
    X = _resolvent(t.A, _lam(t, z))
    left = np.eye(m) * (t.sig.signs[:, None] if t.kind is SystemKind.SELF_ADJOINT else 1.0)

    def w(k):
        return np.eye(m) - 1j * left @ seq.kernel(k, X)

    w0_inv = _checked_inverse(w(0), "normalizer w_A(0, .)")
    closed = np.array([(w(k) * _free_power(t, z, k)[None, :]) @ w0_inv for k in range(K + 1)])
    return direct, closed


def chi_functions(t, lim, z):
    """Diagonal blocks of the large-k limit of ``w_A(k, -1/z)`` (self-adjoint)::

        chi1(z) = I - i z th1^* kappa_R (I + zA)^{-1} th1
        chi2(z) = I + i z th2^* kappa_Q (I + zA)^{-1} th2
    """
    z = complex(z)
    Y = _one_plus_zA_inv(t.A, z)
    th1, th2 = t.theta1, t.theta2
    chi1 = np.eye(t.sig.m1) - 1j * z * th1.conj().T @ lim.kappa_R @ Y @ th1
    chi2 = np.eye(t.sig.m2) + 1j * z * th2.conj().T @ lim.kappa_Q @ Y @ th2
    return ChiPair(chi1, chi2)


def jost_closed(seq: GbdtSequence, lim, k, z):
    """Jost solution ``F_k(z) = W_k(z) w_A(0, -1/z) diag(chi1^{-1}, chi2^{-1})``.

    Self-adjoint kind, real `z`.  The product ``W_k w_A(0, -1/z)`` collapses to
    ``w_A(k, -1/z) (I + i z j)^k`` and is evaluated in that form; the free power
    is applied as the scalars ``(1 + iz)^k`` and ``(1 - iz)^k``.
    """
    t = seq.source
    if t.kind is not SystemKind.SELF_ADJOINT:
        raise ValueError("jost_closed is defined for the self-adjoint kind")
    z = float(np.real(z))
    m = t.sig.m
    if z == 0.0:
        return np.eye(m, dtype=np.complex128)
    chi = chi_functions(t, lim, z)
    inv1 = _checked_inverse(chi.chi1, "chi1")
    inv2 = _checked_inverse(chi.chi2, "chi2")
    D = np.zeros((m, m), dtype=np.complex128)
    D[: t.sig.m1, : t.sig.m1] = inv1
    D[t.sig.m1:, t.sig.m1:] = inv2
    wk = transfer_eval(seq, k, -1.0 / z)
    return (wk * _free_power(t, z, k)[None, :]) @ D


def jost_residual(seq: GbdtSequence, lim, k, z):
    """``|| F_k(z) (I + i z j)^{-k} - I ||`` (spectral norm)."""
    t = seq.source
    F = jost_closed(seq, lim, k, z)
    N = F / _free_power(t, float(np.real(z)), k)[None, :]
    return opnorm(N - np.eye(t.sig.m))


def y_closed(seq: GbdtSequence, k, z):
    """Skew Jost-type column ``Y_k(z) = (1 - i/z)^k w_A(k, -z) [0; I]`` (``m x m2``)."""
    t = seq.source
    if t.kind is not SystemKind.SKEW:
        raise ValueError("y_closed is defined for the skew kind")
    z = complex(z)
    if z == 0:
        raise PoleError("z = 0 is singular for the skew-self-adjoint system")
    w = transfer_eval(seq, k, -z)
    return (1.0 - 1j / z) ** k * w[:, t.sig.m1:]
