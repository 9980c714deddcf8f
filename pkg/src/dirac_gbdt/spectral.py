"""Weyl functions and reflection coefficients.

Three independent ways to reach the same rational ``m1 x m2`` function:

* :func:`weyl_value` -- block ratio ``b d^{-1}`` of the transfer matrix
  ``w_A(0, .)`` at ``-1/z`` (self-adjoint) or ``-z`` (skew);
* :func:`reflection_closed` -- the explicit realization
  ``-i z th1^* S0^{-1} (I + z A_x)^{-1} th2`` with ``A_x = A + i th2 th2^* S0^{-1}``
  (self-adjoint) or ``-i th1^* S0^{-1} (z I + A_x)^{-1} th2`` with
  ``A_x = A - i th2 th2^* S0^{-1}`` (skew);
* :func:`reflection_oracle` -- brute force from the potentials alone: run the
  one-step recursion far out, where the Jost-type solution is pinned by its
  free asymptotics, and read off the block ratio at ``k = 0``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, PoleError
from .gbdt import GbdtSequence, potentials
from .matcore import opnorm
from .transfer import POLE_MARGIN, one_step, split_blocks, transfer_eval
from .triples import ParameterTriple, SystemKind

__all__ = [
    "RationalRealization",
    "realization",
    "weyl_value",
    "reflection_closed",
    "reflection_oracle",
    "WeylSums",
    "weyl_sum_check",
    "SampleResult",
    "EqualityReport",
    "certify_theorems",
    "skew_weyl_threshold",
    "relative_gap",
]

_D_BLOCK_COND = 1e12
_REMOVABLE_SHIFT = 1e-6


def relative_gap(x, y):
    """``||x - y||_2 / max(1, ||y||_2)``."""
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    return opnorm(x - y) / max(1.0, opnorm(y))


@dataclass
class RationalRealization:
    """``z -> scale(z) * left (z-dependent resolvent of core) right``.

    ``form="corrected"`` (default) uses ``(I + z core)^{-1}`` with prefactor
    ``-iz`` for the self-adjoint kind and ``(z I + core)^{-1}`` with prefactor
    ``-i`` for the skew kind.  ``form="literal"`` (skew only) evaluates
    ``-i left (z I + z core)^{-1} right``, the misprinted variant that appears
    in the literature; it is kept so the discrepancy can be demonstrated.
    """

    kind: SystemKind
    left: np.ndarray
    core: np.ndarray
    right: np.ndarray

    def __call__(self, z, form="corrected"):
        z = complex(z)
        n = self.core.shape[0]
        eye = np.eye(n)
        if self.kind is SystemKind.SELF_ADJOINT:
            if form != "corrected":
                raise ValueError("only the corrected form exists for the self-adjoint kind")
            if z == 0:
                return np.zeros((self.left.shape[0], self.right.shape[1]), dtype=np.complex128)
            M = eye + z * self.core
            scale = -1j * z
        elif form == "corrected":
            M = z * eye + self.core
            scale = -1j
        elif form == "literal":
            M = z * eye + z * self.core
            scale = -1j
        else:
            raise ValueError(f"unknown form {form!r}")
        smin = np.linalg.svd(M, compute_uv=False)[-1]
        if smin <= POLE_MARGIN * max(1.0, opnorm(M)):
            raise PoleError(f"z={z} is a pole of the realization")
        return scale * self.left @ np.linalg.solve(M, self.right)

    def poles(self):
        mu = np.linalg.eigvals(self.core)
        if self.kind is SystemKind.SELF_ADJOINT:
            mu = mu[np.abs(mu) > 0]
            return -1.0 / mu
        return -mu


def realization(t: ParameterTriple):
    S0inv = np.linalg.inv(t.S0)
    th1, th2 = t.theta1, t.theta2
    sign = 1.0 if t.kind is SystemKind.SELF_ADJOINT else -1.0
    core = t.A + sign * 1j * th2 @ th2.conj().T @ S0inv
    return RationalRealization(t.kind, th1.conj().T @ S0inv, core, np.array(th2))


def reflection_closed(t: ParameterTriple, z, form="corrected"):
    return realization(t)(z, form)


def _seq0(obj):
    """A sequence with horizon 0 is all the block formulas need."""
    from .gbdt import build_sequence
    if isinstance(obj, GbdtSequence):
        return obj
    return build_sequence(obj, 0)


def weyl_value(seq, z):
    """Weyl function as ``b d^{-1}`` of ``w_A(0, -1/z)`` (self-adjoint) or ``w_A(0, -z)`` (skew).

    Accepts a :class:`GbdtSequence` or a :class:`ParameterTriple`.

    Raises
    ------
    PoleError
        If `z` maps onto the spectrum of ``A`` or the ``d`` block is singular.
    """
    seq = _seq0(seq)
    t = seq.source
    z = complex(z)
    if t.kind is SystemKind.SELF_ADJOINT:
        if z == 0:
            return np.zeros((t.sig.m1, t.sig.m2), dtype=np.complex128)
        lam = -1.0 / z
    else:
        lam = -z
    blocks = split_blocks(transfer_eval(seq, 0, lam), t.sig)
    if np.linalg.cond(blocks.d) > _D_BLOCK_COND:
        raise PoleError(f"d block is singular at z={z} (isolated singularity)")
    return blocks.b @ np.linalg.inv(blocks.d)


def _bottom_ratio(X, m1, check=False):
    top, bot = X[:m1], X[m1:]
    if check and np.linalg.cond(bot) > _D_BLOCK_COND:
        raise PoleError("trailing block of the Jost-type solution is singular")
    return np.linalg.solve(bot.T, top.T).T


def reflection_oracle(seq, z, K=400, tol=1e-12, return_info=False, C=None):
    """Reflection coefficient from the one-step recursion and free asymptotics only.

    With ``W_k`` the fundamental solution built by direct multiplication, the
    Jost-type solution at ``k = 0`` is the limit of ``W_k^{-1} E_k`` where
    ``E_k`` is the free solution (``(I + izj)^k`` or ``(1 - i/z)^k [0; I]``).
    Only its last ``m2`` columns matter and any scalar factor cancels in the
    ratio ``top bottom^{-1}``, so the estimate at step ``k`` is the block
    ratio of ``W_k^{-1} [0; I]``.  ``W_k`` is renormalized every step.

    Iteration stops once three consecutive increments are below `tol`.
    Precomputed potentials (at least `K` of them) may be passed as `C`.

    Parameters
    ----------
    seq : GbdtSequence or ParameterTriple
        Only the triple is used; potentials are recomputed up to `K`.
    z : float or complex
        Real for the self-adjoint kind; nonzero for the skew kind.

    Raises
    ------
    ConvergenceError
        If the estimates have not settled by step `K`.
    """
    t = seq.source if isinstance(seq, GbdtSequence) else seq
    z = complex(z)
    if t.kind is SystemKind.SELF_ADJOINT and abs(z.imag) > 1e-12 * max(1.0, abs(z)):
        raise ValueError("the self-adjoint oracle needs real z")
    if t.kind is SystemKind.SKEW and z == 0:
        raise PoleError("z = 0 is singular for the skew-self-adjoint system")
    if t.kind is SystemKind.SELF_ADJOINT:
        z = complex(z.real)
    m1, m2 = t.sig.m1, t.sig.m2
    if z == 0:
        zero = np.zeros((m1, m2), dtype=np.complex128)
        return (zero, {"steps": 0, "increment": 0.0}) if return_info else zero
    if C is None or len(C) < K:
        C = potentials(t, K)
    e = np.zeros((t.sig.m, m2), dtype=np.complex128)
    e[m1:] = np.eye(m2)
    W = np.eye(t.sig.m, dtype=np.complex128)
    prev = _bottom_ratio(np.linalg.solve(W, e), m1)
    quiet = 0
    inc = np.inf
    for k in range(K):
        W = one_step(t.kind, t.sig, C[k], z) @ W
        W /= np.linalg.norm(W)
        try:
            est = _bottom_ratio(np.linalg.solve(W, e), m1)
        except np.linalg.LinAlgError as exc:
            raise PoleError(f"Jost-type block singular at step {k + 1}") from exc
        # Frobenius norm: cheap and within sqrt(m) of the spectral norm
        inc = float(np.linalg.norm(est - prev))
        prev = est
        quiet = quiet + 1 if inc < tol else 0
        if quiet >= 3:
            est = _bottom_ratio(np.linalg.solve(W, e), m1, check=True)
            info = {"steps": k + 1, "increment": inc}
            return (est, info) if return_info else est
    raise ConvergenceError(
        f"oracle did not settle within K={K} (last increment {inc:.3e})",
        increments=inc,
    )


@dataclass
class WeylSums:
    """Partial sums of the Weyl quadratic forms (trace of the ``m2 x m2`` form)."""

    terms: np.ndarray
    partial_sums: np.ndarray
    tail_ratio: float
    route: str

    @property
    def nondecreasing(self):
        return bool(np.all(np.diff(self.partial_sums) >= -1e-12 * max(1.0, self.partial_sums[-1])))


def skew_weyl_threshold(seq: GbdtSequence):
    """Lower bound for ``Im z`` used when probing the skew Weyl inequality."""
    return 2.0 * (1.0 + max(opnorm(C) for C in seq.C))


def weyl_sum_check(seq: GbdtSequence, z, K=None, route="closed"):
    """Partial sums ``sum_{k<=K} trace([phi^*, I] W_k^* H_k W_k [phi; I])``.

    Self-adjoint: ``H_k = q(z)^k C_k`` with ``q(z) = 1/(1 + |z|^2)``, ``z`` in
    the lower half-plane.  Skew: ``H_k = I``, ``Im z`` large.

    ``route="closed"`` evaluates ``W_k [phi; I]`` as
    ``s^k w_A(k, .)[0; I] d^{-1}`` (``s = 1 - iz`` or ``1 - i/z``), which is the
    exact image of the Weyl vector; ``route="direct"`` multiplies one-step
    matrices, whose rounding error is amplified along the growing solution,
    so it is only meaningful for moderate K.
    """
    t = seq.source
    K = seq.K if K is None else K
    seq._check_k(K, seq.K)
    z = complex(z)
    m1 = t.sig.m1
    sa = t.kind is SystemKind.SELF_ADJOINT
    lam = -1.0 / z if sa else -z
    q = 1.0 / (1.0 + abs(z) ** 2)
    terms = []
    if route == "closed":
        d = split_blocks(transfer_eval(seq, 0, lam), t.sig).d
        dinv = np.linalg.inv(d)
        s = (1.0 - 1j * z) if sa else (1.0 - 1j / z)
        for k in range(K + 1):
            v = s ** k * transfer_eval(seq, k, lam)[:, m1:] @ dinv
            H = q ** k * seq.C[k] if sa else np.eye(t.sig.m)
            terms.append(float(np.real(np.trace(v.conj().T @ H @ v))))
    elif route == "direct":
        phi = weyl_value(seq, z)
        v = np.vstack([phi, np.eye(t.sig.m2)])
        for k in range(K + 1):
            H = q ** k * seq.C[k] if sa else np.eye(t.sig.m)
            terms.append(float(np.real(np.trace(v.conj().T @ H @ v))))
            v = one_step(t.kind, t.sig, seq.C[k], z) @ v
    else:
        raise ValueError(f"unknown route {route!r}")
    terms = np.array(terms)
    if len(terms) < 2 or terms[-2] == 0.0:
        ratio = 0.0
    else:
        ratio = float(terms[-1] / terms[-2])
    return WeylSums(terms, np.cumsum(terms), ratio, route)


@dataclass
class SampleResult:
    z: complex
    route: str  # "oracle" (real axis) or "weyl" (half-plane)
    closed: np.ndarray = None
    other: np.ndarray = None
    error: float = float("nan")
    shifted: bool = False
    skipped: str = ""
    literal_gap: float = float("nan")


@dataclass
class EqualityReport:
    kind: SystemKind
    samples: list = field(default_factory=list)
    max_oracle_error: float = 0.0
    max_weyl_error: float = 0.0
    oracle_tol: float = 1e-7
    weyl_tol: float = 1e-9
    passed: bool = False
    # skew only
    literal_max_gap: float = float("nan")
    corrected_matches_oracle: bool = False
    literal_matches_oracle: bool = False

    @property
    def n_oracle(self):
        return sum(1 for s in self.samples if s.route == "oracle" and not s.skipped)

    @property
    def n_weyl(self):
        return sum(1 for s in self.samples if s.route == "weyl" and not s.skipped)

    def summary(self):
        lines = [f"{self.kind.value}: oracle max {self.max_oracle_error:.3e} "
                 f"({self.n_oracle} pts, tol {self.oracle_tol:g}); weyl max "
                 f"{self.max_weyl_error:.3e} ({self.n_weyl} pts, tol {self.weyl_tol:g}); "
                 f"pass={self.passed}"]
        if self.kind is SystemKind.SKEW:
            lines.append(f"corrected form matched oracle: {self.corrected_matches_oracle}; "
                         f"literal form max gap {self.literal_max_gap:.3e} "
                         f"(matches: {self.literal_matches_oracle})")
        return "\n".join(lines)


def _in_weyl_region(t, z, threshold):
    if t.kind is SystemKind.SELF_ADJOINT:
        return z.imag < 0
    return z.imag > threshold


def certify_theorems(t: ParameterTriple, z_samples, tol=1e-7, weyl_tol=1e-9,
                     oracle_K=400, seq=None, literal_gap_min=1e-3):
    """Compare the closed-form realization with the oracle and the Weyl route.

    Real samples go to :func:`reflection_oracle`; non-real samples inside the
    Weyl region (lower half-plane, or ``Im z`` above
    :func:`skew_weyl_threshold` for the skew kind) go to :func:`weyl_value`.
    Samples outside the region are skipped and flagged.  A sample where the
    ``d`` block is singular is moved by ``1e-6`` and flagged as shifted.

    For the skew kind the literal variant of the realization is evaluated at
    every sample too; ``literal_matches_oracle`` is true only if it agrees
    with the oracle/Weyl values everywhere within ``literal_gap_min``.
    """
    seq = seq if seq is not None else _seq0(t)
    threshold = skew_weyl_threshold(seq) if t.kind is SystemKind.SKEW else 0.0
    report = EqualityReport(t.kind, oracle_tol=tol, weyl_tol=weyl_tol)
    real_ref = realization(t)
    literal_gaps = []
    C = None
    for z in z_samples:
        z = complex(z)
        on_axis = abs(z.imag) <= 1e-14 * max(1.0, abs(z))
        res = SampleResult(z, "oracle" if on_axis else "weyl")
        report.samples.append(res)
        if not on_axis and not _in_weyl_region(t, z, threshold):
            res.skipped = "outside Weyl region"
            continue
        for attempt in range(2):
            try:
                res.closed = real_ref(z)
                if on_axis:
                    if C is None:
                        C = potentials(t, oracle_K)
                    res.other = reflection_oracle(t, z.real, K=oracle_K, C=C)
                else:
                    res.other = weyl_value(seq, z)
                break
            except PoleError as exc:
                if attempt == 1:
                    res.skipped = f"pole: {exc}"
                else:
                    z = z + (_REMOVABLE_SHIFT if on_axis else -1j * _REMOVABLE_SHIFT * np.sign(z.imag))
                    res.z, res.shifted = z, True
            except ConvergenceError as exc:
                res.skipped = f"oracle: {exc}"
                break
        if res.skipped:
            continue
        res.error = relative_gap(res.other, res.closed)
        if t.kind is SystemKind.SKEW and abs(z - 1) > 0.1 and z != 0:
            try:
                res.literal_gap = relative_gap(real_ref(z, "literal"), res.other)
                literal_gaps.append(res.literal_gap)
            except PoleError:
                pass
    oracle_err = [s.error for s in report.samples if s.route == "oracle" and not s.skipped]
    weyl_err = [s.error for s in report.samples if s.route == "weyl" and not s.skipped]
    report.max_oracle_error = max(oracle_err, default=0.0)
    report.max_weyl_error = max(weyl_err, default=0.0)
    report.passed = report.max_oracle_error < tol and report.max_weyl_error < weyl_tol
    if t.kind is SystemKind.SKEW:
        report.corrected_matches_oracle = bool(oracle_err) and report.max_oracle_error < tol
        report.literal_max_gap = max(literal_gaps, default=float("nan"))
        report.literal_matches_oracle = bool(literal_gaps) and report.literal_max_gap < literal_gap_min
    return report
