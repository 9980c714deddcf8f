import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from dirac_gbdt.errors import DimensionError, SingularEquationError
from dirac_gbdt.matcore import (
    adjoint,
    as_matrix,
    controllability_rank,
    hermitian_part,
    is_positive_definite,
    solve_sylvester,
)

seeds = st.integers(min_value=0, max_value=2**31 - 1)
sizes = st.integers(min_value=1, max_value=6)


def _cgauss(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_as_matrix_rejects_non_2d():
    with pytest.raises(DimensionError):
        as_matrix(np.zeros(3))


def test_positive_definite_scalar_fixtures():
    assert is_positive_definite(np.array([[0.75]]))[0]
    assert not is_positive_definite(np.array([[-0.75]]))[0]
    assert not is_positive_definite(np.zeros((2, 2)))[0]


def test_positive_definite_rejects_non_hermitian():
    M = np.array([[2.0, 1.0], [0.0, 2.0]])
    assert not is_positive_definite(M)[0]


def test_positive_definite_rejects_tiny_pivot():
    M = np.diag([1.0, 1e-14])
    assert not is_positive_definite(M, tol=1e-10)[0]
    assert is_positive_definite(M, tol=1e-15)[0]


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=sizes)
def test_positive_definite_factor_reproduces_matrix(seed, n):
    rng = np.random.default_rng(seed)
    X = _cgauss(rng, (n, n))
    M = X @ adjoint(X) + 0.5 * np.eye(n)
    ok, L = is_positive_definite(M)
    assert ok
    np.testing.assert_allclose(L @ adjoint(L), M, atol=1e-10 * np.linalg.norm(M))
    assert np.allclose(L, np.tril(L))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(min_value=2, max_value=6))
def test_indefinite_matrix_is_rejected(seed, n):
    rng = np.random.default_rng(seed)
    U = unitary_group.rvs(n, random_state=rng)
    d = rng.uniform(0.5, 2.0, n)
    d[rng.integers(n)] *= -1
    M = hermitian_part(U @ np.diag(d) @ adjoint(U))
    assert not is_positive_definite(M)[0]


def test_sylvester_scalar_fixture():
    # 2i X - X (-2i) = 3i  =>  X = 3/4
    X = solve_sylvester(np.array([[2j]]), np.array([[-2j]]), np.array([[3j]]))
    assert X[0, 0] == pytest.approx(0.75, abs=1e-15)


def test_sylvester_overlapping_spectra():
    A = np.diag([1.0 + 1j, 2.0])
    with pytest.raises(SingularEquationError):
        solve_sylvester(A, A, np.eye(2))


def test_sylvester_shape_check():
    with pytest.raises(DimensionError):
        solve_sylvester(np.eye(2), 2 * np.eye(3), np.eye(2))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=sizes, p=sizes)
def test_sylvester_residual(seed, n, p):
    rng = np.random.default_rng(seed)
    A = _cgauss(rng, (n, n)) + 4j * np.eye(n)
    B = _cgauss(rng, (p, p)) - 4j * np.eye(p)
    C = _cgauss(rng, (n, p))
    X = solve_sylvester(A, B, C)
    scale = np.linalg.norm(A, 2) * np.linalg.norm(X, 2) + np.linalg.norm(C, 2)
    assert np.linalg.norm(A @ X - X @ B - C, 2) <= 1e-12 * scale


def test_controllability_examples():
    A = np.diag([1.0, 2.0, 3.0])
    assert controllability_rank(A, np.ones((3, 1))) == 3
    assert controllability_rank(A, np.array([[1.0], [0.0], [0.0]])) == 1
    assert controllability_rank(A, np.zeros((3, 1))) == 0
    with pytest.raises(DimensionError):
        controllability_rank(A, np.ones((2, 1)))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=sizes, m=st.integers(min_value=1, max_value=3))
def test_controllability_rank_invariances(seed, n, m):
    rng = np.random.default_rng(seed)
    A = _cgauss(rng, (n, n))
    T = _cgauss(rng, (n, m))
    r = controllability_rank(A, T)
    # column scaling
    D = np.diag(rng.uniform(0.5, 2.0, m) * np.exp(1j * rng.uniform(0, 2 * np.pi, m)))
    assert controllability_rank(A, T @ D) == r
    # unitary similarity
    U = unitary_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)
    assert controllability_rank(U @ A @ adjoint(U), U @ T) == r
