import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from dirac_gbdt.errors import ConditioningError, ConvergenceError, PoleError
from dirac_gbdt.gbdt import (
    advance_pi,
    advance_s,
    build_sequence,
    g_matrix,
    limits,
    potentials,
    rq_increment,
    rq_matrices,
)
from dirac_gbdt.matcore import adjoint, opnorm
from dirac_gbdt.triples import ParameterTriple, Signature, SystemKind, generate

SA, SKEW = SystemKind.SELF_ADJOINT, SystemKind.SKEW
SIG = Signature(1, 1)
A_2I = np.array([[2j]])


def test_advance_pi_scalar():
    P1 = advance_pi(np.array([[2.0, 1.0]]), A_2I, SIG)
    np.testing.assert_allclose(P1, [[3.0, 0.5]], atol=1e-15)
    P2 = advance_pi(P1, A_2I, SIG)
    np.testing.assert_allclose(P2, [[4.5, 0.25]], atol=1e-15)
    np.testing.assert_array_equal(advance_pi(np.zeros((1, 2)), A_2I, SIG), np.zeros((1, 2)))


def test_advance_s_scalar():
    Pi0 = np.array([[2.0, 1.0]])
    assert advance_s(np.array([[0.75]]), Pi0, A_2I, SA, SIG)[0, 0] == pytest.approx(35 / 16, abs=1e-15)
    assert advance_s(np.array([[1.25]]), Pi0, A_2I, SKEW, SIG)[0, 0] == pytest.approx(37 / 16, abs=1e-15)
    # zero Pi: S1 = S0 + A^-1 S0 A^-*
    assert advance_s(np.array([[0.75]]), np.zeros((1, 2)), A_2I, SA, SIG)[0, 0] == pytest.approx(0.75 * 1.25)


def test_g_matrix_scalar():
    assert g_matrix(A_2I, "G")[0, 0] == pytest.approx(1 / 3, abs=1e-15)
    assert g_matrix(A_2I, "G_tilde")[0, 0] == pytest.approx(3.0, abs=1e-14)
    assert (g_matrix(A_2I, "G") @ g_matrix(A_2I, "G_tilde"))[0, 0] == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(PoleError):
        g_matrix(np.array([[1j]]), "G_tilde")
    with pytest.raises(PoleError):
        g_matrix(np.array([[-1j]]), "G")
    with pytest.raises(ValueError):
        g_matrix(A_2I, "H")


def test_t1_potential_fixture(t1):
    seq = build_sequence(t1, 1)
    expected = np.array([[233, 208], [208, 233]]) / 105
    np.testing.assert_allclose(seq.C[0], expected, atol=1e-12)
    j = SIG.j
    assert opnorm(seq.C[0] @ j @ seq.C[0] - j) <= 1e-12
    np.testing.assert_allclose(np.linalg.eigvalsh(seq.C[0]), [5 / 21, 21 / 5], atol=1e-12)
    assert seq.S[1][0, 0] == pytest.approx(35 / 16)


def test_t2_potential_is_involution(t2):
    seq = build_sequence(t2, 1)
    C0 = seq.C[0]
    np.testing.assert_allclose(C0, adjoint(C0), atol=1e-15)
    np.testing.assert_allclose(C0 @ C0, np.eye(2), atol=1e-12)
    assert np.trace(C0).real == pytest.approx(0.0, abs=1e-12)


def test_zero_pi_gives_identity_potential():
    A = np.diag([1j, 2j + 0.5])
    A = A + np.array([[0, 0.3], [0, 0]])
    t = ParameterTriple(SA, Signature(1, 2), A, np.eye(2), np.zeros((2, 3)))
    seq = build_sequence(t, 5)
    for C in seq.C:
        np.testing.assert_allclose(C, np.eye(3), atol=1e-15)


def test_rq_matrices_t1(t1):
    seq = build_sequence(t1, 3)
    for method in ("scaled", "definition"):
        R0, Q0 = rq_matrices(seq, 0, method)
        np.testing.assert_allclose(R0, t1.S0, atol=1e-15)
        np.testing.assert_allclose(Q0, t1.S0, atol=1e-15)
        R1, Q1 = rq_matrices(seq, 1, method)
        assert R1[0, 0] == pytest.approx(35 / 36, rel=1e-14)
        assert Q1[0, 0] == pytest.approx(35 / 4, rel=1e-14)
    dR, dQ = rq_increment(t1, 0)
    assert dR[0, 0] == pytest.approx(35 / 36 - 3 / 4, rel=1e-13)
    assert dQ[0, 0] == pytest.approx(35 / 4 - 3 / 4, rel=1e-13)


def test_rq_matrices_pole():
    # A = i: G = 0 is harmless, but G~ and Q_k need (A - iI)^{-1}
    t = ParameterTriple(SA, SIG, np.array([[1j]]), np.array([[1.5]]), np.array([[2.0, 1.0]]))
    seq = build_sequence(t, 2)
    for method in ("scaled", "definition"):
        with pytest.raises(PoleError):
            rq_matrices(seq, 1, method)


def test_closed_form_pi():
    t = generate(SA, 4, Signature(2, 1), seed=5)
    seq = build_sequence(t, 20)
    eye = np.eye(4)
    Ainv = np.linalg.inv(t.A)
    for k in (0, 1, 7, 20):
        top = np.linalg.matrix_power(eye + 1j * Ainv, k) @ t.theta1
        bot = np.linalg.matrix_power(eye - 1j * Ainv, k) @ t.theta2
        ref = np.hstack([top, bot])
        assert opnorm(seq.Pi[k] - ref) <= 1e-12 * opnorm(ref)


def test_sequence_is_immutable(t1):
    seq = build_sequence(t1, 2)
    with pytest.raises(ValueError):
        seq.C[0][0, 0] = 0.0
    with pytest.raises(IndexError):
        seq.scaled_pi(10)


def test_negative_horizon(t1):
    with pytest.raises(ValueError):
        build_sequence(t1, -1)


def test_positivity_loss_raises_conditioning_error():
    # identity holds but S0 is not positive: the path cannot start
    t = ParameterTriple(SA, SIG, A_2I, np.array([[-0.75]]), np.array([[1.0, 2.0]]))
    with pytest.raises(ConditioningError) as info:
        build_sequence(t, 3)
    assert info.value.step == 0


def test_potentials_match_sequence(t1):
    np.testing.assert_allclose(potentials(t1, 10), build_sequence(t1, 10).C, atol=1e-15)


def test_limits_t1(t1):
    lim = limits(t1, 1e-12, 200)
    # R_k -> R_inf = 1 for A = 2i, theta2 = 1 (geometric series of 2|G|^{2k}/|A+i|^2)
    assert lim.kappa_R[0, 0] == pytest.approx(1.0, abs=1e-11)
    assert abs(lim.kappa_Q[0, 0]) <= 1e-11
    doubled = limits(t1, 1e-14, 400)
    assert abs(doubled.kappa_R[0, 0] - lim.kappa_R[0, 0]) <= 1e-11


def test_limits_t2(t2):
    lim = limits(t2, 1e-8, 60)
    assert lim.q_inv_norm <= 1e-8
    assert lim.q_inv_gt_theta1_norm <= 1e-8
    assert opnorm(lim.kappa_Q) <= 1e-8


def test_limits_nonconvergence(t1):
    with pytest.raises(ConvergenceError) as info:
        limits(t1, 1e-30, 5)
    assert len(info.value.increments) == 2


def test_skew_q_decay_is_eventually_monotone():
    t = generate(SKEW, 4, Signature(1, 2), seed=8)
    seq = build_sequence(t, 60)
    qn = np.array([opnorm(seq.q_inv(k)) for k in range(61)])
    qg = np.array([opnorm(adjoint(seq.Gk[k]) @ seq.solve_r(k, t.theta1)) for k in range(61)])
    tail = slice(20, None)
    assert np.all(np.diff(qn[tail]) <= 1e-14)
    assert np.all(np.diff(qg[tail]) <= 1e-14)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), kind=st.sampled_from([SA, SKEW]), n=st.integers(1, 5))
def test_potentials_invariant_under_unitary_similarity(seed, kind, n):
    t = generate(kind, n, Signature(1 + seed % 2, 1 + seed % 3), seed=seed)
    U = unitary_group.rvs(n, random_state=seed) if n > 1 else np.array([[1j]])
    u = ParameterTriple(kind, t.sig, U @ t.A @ adjoint(U), U @ t.S0 @ adjoint(U), U @ t.Pi0)
    np.testing.assert_allclose(potentials(u, 15), potentials(t, 15), atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 6))
def test_self_adjoint_identity_propagates(seed, n):
    t = generate(SA, n, Signature(1 + seed % 3, 1 + (seed // 3) % 3), seed=seed)
    seq = build_sequence(t, 40)
    assert np.max(seq.identity_residuals) <= 1e-10


def test_long_horizon_raw_overflow_is_contained():
    # the raw recursion overflows long before k = 400; the scaled path does not
    t = generate(SKEW, 3, Signature(1, 2), seed=11)
    seq = build_sequence(t, 400)
    resid = seq.identity_residuals
    first_nan = int(np.argmax(np.isnan(resid)))
    assert 40 < first_nan < 400
    assert np.all(np.isnan(seq.S[first_nan:])) and np.all(np.isinf(seq.s_condition[first_nan:]))
    assert np.all(np.isfinite(seq.C)) and np.all(np.isfinite(seq.R))
    np.testing.assert_allclose(seq.C, potentials(t, 400), atol=1e-14)
