"""GBDT parameter triples ``{A, S0, Pi0}``: definition, validation, generation.

A triple determines a discrete Dirac system with a pseudo-exponential
potential.  Two system kinds share the same data layout and differ only in
the middle factor of the defining matrix identity::

    self-adjoint:  A S0 - S0 A^* = i Pi0 j Pi0^*
    skew:          A S0 - S0 A^* = i Pi0 Pi0^*

with ``j = diag(I_m1, -I_m2)``.
"""

import enum
from functools import cached_property
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_discrete_lyapunov
from scipy.stats import unitary_group

from .errors import DimensionError, GenerationError
from .matcore import (
    DEFAULT_TOL,
    adjoint,
    as_matrix,
    controllability_rank,
    hermitian_part,
    is_positive_definite,
    opnorm,
    solve_sylvester,
    spectrum,
)

__all__ = [
    "SystemKind",
    "Signature",
    "ParameterTriple",
    "Check",
    "ValidationReport",
    "validate",
    "derive_s0",
    "generate",
    "EIGEN_BOX",
    "MAX_S0_CONDITION",
    "MAX_LIMIT_CONDITION",
    "I_EXCLUSION_RADIUS",
]

# Eigenvalue box for generated A: (re_min, re_max, im_min, im_max).
EIGEN_BOX = (-1.0, 1.0, 0.5, 2.5)
I_EXCLUSION_RADIUS = 0.2
MAX_S0_CONDITION = 1e6
MAX_LIMIT_CONDITION = 1e10
# Off-diagonal scale of the Schur factor of generated A (controls non-normality).
_NONNORMAL_SCALE = 0.3


class SystemKind(enum.Enum):
    SELF_ADJOINT = "self_adjoint"
    SKEW = "skew"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"sa": cls.SELF_ADJOINT, "self_adjoint": cls.SELF_ADJOINT,
                   "skew": cls.SKEW, "skew_self_adjoint": cls.SKEW}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown system kind {value!r}") from None


@dataclass(frozen=True)
class Signature:
    """Block sizes of ``j = diag(I_m1, -I_m2)``."""

    m1: int
    m2: int

    def __post_init__(self):
        if int(self.m1) < 1 or int(self.m2) < 1:
            raise DimensionError(f"m1 and m2 must be >= 1, got ({self.m1}, {self.m2})")

    @property
    def m(self):
        return self.m1 + self.m2

    @cached_property
    def signs(self):
        out = np.concatenate([np.ones(self.m1), -np.ones(self.m2)])
        out.setflags(write=False)
        return out

    @property
    def j(self):
        return np.diag(self.signs).astype(np.complex128)


@dataclass(frozen=True, eq=False)
class ParameterTriple:
    """The data ``{A, S0, Pi0}`` of a GBDT together with the system kind."""

    kind: SystemKind
    sig: Signature
    A: np.ndarray
    S0: np.ndarray
    Pi0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kind", SystemKind.parse(self.kind))
        A = as_matrix(self.A, "A")
        S0 = as_matrix(self.S0, "S0")
        Pi0 = as_matrix(self.Pi0, "Pi0")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if S0.shape != (n, n):
            raise DimensionError(f"S0 must have shape {(n, n)}, got {S0.shape}")
        if Pi0.shape != (n, self.sig.m):
            raise DimensionError(f"Pi0 must have shape {(n, self.sig.m)}, got {Pi0.shape}")
        for name, arr in (("A", A), ("S0", S0), ("Pi0", Pi0)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def theta1(self):
        return self.Pi0[:, : self.sig.m1]

    @property
    def theta2(self):
        return self.Pi0[:, self.sig.m1:]

    @property
    def middle(self):
        """Middle factor of the identity: ``j`` or ``I_m``."""
        if self.kind is SystemKind.SELF_ADJOINT:
            return self.sig.j
        return np.eye(self.sig.m, dtype=np.complex128)

    def identity_residual(self):
        """Relative residual of ``A S0 - S0 A^* - i Pi0 (j|I) Pi0^*``."""
        return _identity_residual(self.A, self.S0, self.Pi0, self.middle)

    def __repr__(self):
        return (f"ParameterTriple(kind={self.kind.value}, n={self.n}, "
                f"m1={self.sig.m1}, m2={self.sig.m2})")


def _identity_residual(A, S, Pi, middle):
    res = A @ S - S @ adjoint(A) - 1j * Pi @ middle @ adjoint(Pi)
    scale = opnorm(A) * opnorm(S) + opnorm(Pi) ** 2
    return float(np.linalg.norm(res, 2) / scale) if scale > 0 else float(np.linalg.norm(res, 2))


@dataclass
class Check:
    value: float
    passed: bool


@dataclass
class ValidationReport:
    """Per-check values and flags; the overall flags are conjunctions."""

    kind: SystemKind
    checks: dict = field(default_factory=dict)
    admissible: bool = False
    strongly_admissible: bool = False

    def failed(self):
        return [name for name, c in self.checks.items() if not c.passed]


def validate(t, tol=DEFAULT_TOL):
    """Evaluate admissibility conditions of `t`.

    Mathematical failures are recorded in the report, never raised.

    Checks (all values are reported, names are stable):

    ``identity_residual``
        relative residual of the defining identity, must be ``<= tol``
    ``s0_hermitian``
        ``||S0 - S0^*|| / ||S0||``
    ``positivity_margin``
        smallest eigenvalue of ``S0`` relative to ``||S0||``; must exceed tol
    ``det_margin``
        smallest singular value of ``A`` relative to the largest
    ``spectrum_upper``
        ``min Im sigma(A)``, must be positive (self-adjoint strong admissibility)
    ``i_margin``
        distance of ``sigma(A)`` from ``{i, -i}``
    ``controllability``
        numerical rank of the Krylov matrix of ``(A, theta1)`` (must equal n)
    """
    kind = t.kind
    A, S0 = t.A, t.S0
    n = t.n
    checks = {}
    ident = t.identity_residual()
    checks["identity_residual"] = Check(ident, ident <= tol)

    s_scale = opnorm(S0)
    herm = float(np.linalg.norm(S0 - adjoint(S0), 2) / s_scale) if s_scale > 0 else np.inf
    checks["s0_hermitian"] = Check(herm, herm <= tol)
    if s_scale > 0:
        margin = float(np.min(np.linalg.eigvalsh(hermitian_part(S0))) / s_scale)
    else:
        margin = 0.0
    pd_ok = is_positive_definite(S0, tol)[0]
    checks["positivity_margin"] = Check(margin, pd_ok and margin > tol)

    sv = np.linalg.svd(A, compute_uv=False)
    det_margin = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    checks["det_margin"] = Check(det_margin, det_margin > tol)

    eig = spectrum(A)
    a_scale = max(opnorm(A), 1.0)
    im_min = float(np.min(eig.imag))
    checks["spectrum_upper"] = Check(im_min, im_min > tol * a_scale)
    i_margin = float(min(np.min(np.abs(eig - 1j)), np.min(np.abs(eig + 1j))))
    checks["i_margin"] = Check(i_margin, i_margin > tol * a_scale)

    rank = controllability_rank(A, t.theta1, tol)
    checks["controllability"] = Check(float(rank), rank == n)

    base = ["identity_residual", "s0_hermitian", "positivity_margin", "det_margin"]
    if kind is SystemKind.SELF_ADJOINT:
        admissible = all(checks[c].passed for c in base)
        strong = admissible and checks["spectrum_upper"].passed and checks["i_margin"].passed
    else:
        admissible = all(checks[c].passed for c in base + ["controllability"])
        strong = admissible and checks["i_margin"].passed
    return ValidationReport(kind, checks, admissible, strong)


def derive_s0(kind, sig, A, Pi0, tol=DEFAULT_TOL):
    """Hermitian solution ``S0`` of the defining identity for given ``A, Pi0``.

    Positivity is not guaranteed (in the self-adjoint case the right-hand side
    is indefinite); callers must check it.
    """
    kind = SystemKind.parse(kind)
    A = as_matrix(A, "A")
    Pi0 = as_matrix(Pi0, "Pi0")
    if Pi0.shape != (A.shape[0], sig.m):
        raise DimensionError(f"Pi0 must have shape {(A.shape[0], sig.m)}, got {Pi0.shape}")
    middle = sig.j if kind is SystemKind.SELF_ADJOINT else np.eye(sig.m)
    X = solve_sylvester(A, adjoint(A), 1j * Pi0 @ middle @ adjoint(Pi0), tol)
    return hermitian_part(X)


def _random_eigenvalues(rng, n):
    re0, re1, im0, im1 = EIGEN_BOX
    out = []
    while len(out) < n:
        z = complex(rng.uniform(re0, re1), rng.uniform(im0, im1))
        if abs(z - 1j) > I_EXCLUSION_RADIUS:
            out.append(z)
    return np.array(out)


def _complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _draw_candidate(kind, n, sig, rng, tol):
    T = np.diag(_random_eigenvalues(rng, n)) + np.triu(
        _NONNORMAL_SCALE * _complex_gaussian(rng, (n, n)), 1)
    U = unitary_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)
    A = U @ T @ adjoint(U)
    Pi0 = _complex_gaussian(rng, (n, sig.m))
    if kind is SystemKind.SELF_ADJOINT:
        # S0(t) = X1 - t^2 X2 solves the identity with theta2 scaled by t;
        # keep t below the positivity threshold instead of hoping for luck.
        th1, th2 = Pi0[:, : sig.m1], Pi0[:, sig.m1:]
        X1 = hermitian_part(solve_sylvester(A, adjoint(A), 1j * th1 @ adjoint(th1), tol))
        X2 = hermitian_part(solve_sylvester(A, adjoint(A), 1j * th2 @ adjoint(th2), tol))
        ok, L = is_positive_definite(X1, tol)
        if ok:
            Linv = np.linalg.inv(L)
            lam = np.max(np.linalg.eigvalsh(hermitian_part(Linv @ X2 @ adjoint(Linv))))
            if lam > 0:
                t = min(1.0, rng.uniform(0.2, 0.8) / np.sqrt(lam))
                Pi0[:, sig.m1:] *= t
    S0 = derive_s0(kind, sig, A, Pi0, tol)
    return ParameterTriple(kind, sig, A, S0, Pi0)


def _limit_condition(t):
    """Condition number of ``lim R_k`` (the scaled ``S_k``), a discrete Lyapunov solution.

    With ``G = (A + iI)^{-1}(A - iI)`` and ``B = (A + iI)^{-1}`` the limit solves
    ``X = G X G^* + 2 B th th^* B^*`` where ``th = th1`` (skew kind), while for
    the self-adjoint kind ``S0`` is added to the solution driven by ``th2``.
    """
    eye = np.eye(t.n)
    B = np.linalg.inv(t.A + 1j * eye)
    G = B @ (t.A - 1j * eye)
    if t.kind is SystemKind.SKEW:
        b = B @ t.theta1
        X = solve_discrete_lyapunov(G, 2.0 * b @ adjoint(b))
    else:
        b = B @ t.theta2
        X = t.S0 + solve_discrete_lyapunov(G, 2.0 * b @ adjoint(b))
    return float(np.linalg.cond(hermitian_part(X)))


def generate(kind, n, sig, seed, max_attempts=1000, tol=DEFAULT_TOL):
    """Draw a strongly admissible triple, deterministically per `seed`.

    ``A`` is a random unitary similarity of an upper-triangular matrix whose
    diagonal is uniform in :data:`EIGEN_BOX` minus a disc of radius
    :data:`I_EXCLUSION_RADIUS` around ``i``.  ``Pi0`` has unit-variance
    complex Gaussian entries (for the self-adjoint kind the ``theta2`` block
    is then shrunk below the level where ``S0`` would lose positivity).
    ``S0`` is derived from the identity and the candidate is kept only if
    :func:`validate` reports strong admissibility and ``cond(S0)`` does not
    exceed :data:`MAX_S0_CONDITION`, and the limit of the scaled ``S_k``
    has condition number at most :data:`MAX_LIMIT_CONDITION`.

    The conditioning cap matters for the self-adjoint kind with ``m1 = 1``:
    the stored ``S0`` satisfies its identity only up to ``eps * ||S0||``, and
    the potentials inherit a defect of roughly ``eps * cond(S0)``.  For
    ``n = 6`` only a few percent of candidates pass, hence the generous
    default `max_attempts`.  The second cap bounds the rounding carried by
    the triangular factors of the scaled sequence (it binds for the skew
    kind, whose limit is a gramian of ``(G, B th1)``).

    Raises
    ------
    GenerationError
        After `max_attempts` rejected candidates.
    """
    kind = SystemKind.parse(kind)
    if int(n) < 1:
        raise DimensionError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_attempts + 1):
        try:
            t = _draw_candidate(kind, int(n), sig, rng, tol)
        except np.linalg.LinAlgError:
            continue
        if (validate(t, tol).strongly_admissible
                and np.linalg.cond(t.S0) <= MAX_S0_CONDITION
                and _limit_condition(t) <= MAX_LIMIT_CONDITION):
            return t
    raise GenerationError(
        f"no strongly admissible {kind.value} triple after {max_attempts} attempts",
        attempts=max_attempts,
    )
