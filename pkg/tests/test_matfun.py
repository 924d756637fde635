"""Spectral matrix functions against hand-derived and round-trip oracles."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geomlearn.errors import DomainError, ValidationError
from geomlearn.matfun import (
    as_spd,
    expm_sym,
    frobenius_inner,
    logdet_spd,
    logm_spd,
    powm_spd,
    random_spd,
    rel_fro_error,
    solve_lyapunov,
    sqrtm_spd,
    sym_eig,
)

A2 = np.array([[2.0, 1.0], [1.0, 2.0]])
# eigenvectors of A2 worked out by hand
Q2 = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2.0)


def test_sym_eig_identity():
    lam, Q = sym_eig(np.eye(2))
    np.testing.assert_allclose(lam, [1.0, 1.0])
    np.testing.assert_allclose(Q.T @ Q, np.eye(2), atol=1e-12)


def test_sym_eig_diag_sorted():
    lam, _ = sym_eig(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(lam, [1.0, 3.0])


def test_sym_eig_char_poly():
    lam, Q = sym_eig(A2)
    np.testing.assert_allclose(lam, [1.0, 3.0], atol=1e-14)
    dec = sym_eig(A2)
    assert np.linalg.norm(dec.reconstruct() - A2) <= 1e-10 * np.linalg.norm(A2)


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(ValidationError):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_sym_eig_rejects_nonsquare():
    with pytest.raises(ValidationError):
        sym_eig(np.ones((2, 3)))


def test_as_spd_rejects_near_singular():
    with pytest.raises(DomainError):
        as_spd(np.diag([1.0, 1e-11]))
    with pytest.raises(DomainError):
        as_spd(-np.eye(2))
    as_spd(np.diag([1.0, 1e-9]))


def test_logm_examples():
    np.testing.assert_allclose(logm_spd(np.eye(3)), np.zeros((3, 3)), atol=1e-15)
    np.testing.assert_allclose(logm_spd(np.diag([np.e, 1.0])), np.diag([1.0, 0.0]), atol=1e-15)
    expected = Q2 @ np.diag([np.log(1.0), np.log(3.0)]) @ Q2.T
    np.testing.assert_allclose(logm_spd(A2), expected, atol=1e-14)


def test_logm_domain_error():
    with pytest.raises(DomainError):
        logm_spd(np.diag([1.0, -1.0]))


def test_expm_examples():
    np.testing.assert_allclose(expm_sym(np.zeros((2, 2))), np.eye(2))
    np.testing.assert_allclose(expm_sym(np.diag([1.0, 0.0])), np.diag([np.e, 1.0]), rtol=1e-15)


def test_sqrtm_examples(rng):
    np.testing.assert_allclose(sqrtm_spd(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(sqrtm_spd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), rtol=1e-15)
    P = random_spd(rng, 5)
    S = sqrtm_spd(P)
    assert rel_fro_error(S @ S, P) <= 1e-9


def test_powm_and_logdet():
    np.testing.assert_allclose(powm_spd(np.diag([4.0, 9.0]), -0.5), np.diag([0.5, 1 / 3]))
    assert logdet_spd(np.diag([2.0, 3.0])) == pytest.approx(np.log(6.0), abs=1e-15)


def test_lyapunov_identity():
    V = np.array([[1.0, 2.0], [2.0, -3.0]])
    np.testing.assert_allclose(solve_lyapunov(np.eye(2), V), V / 2)


def test_lyapunov_diagonal():
    p = np.array([1.0, 4.0])
    V = np.array([[2.0, 5.0], [5.0, 8.0]])
    expected = V / (p[:, None] + p[None, :])
    np.testing.assert_allclose(solve_lyapunov(np.diag(p), V), expected, rtol=1e-14)


def test_lyapunov_residual_and_dims(rng):
    P = random_spd(rng, 6)
    V = rng.standard_normal((6, 6))
    V = V + V.T
    X = solve_lyapunov(P, V)
    assert np.linalg.norm(X @ P + P @ X - V) <= 1e-9 * np.linalg.norm(V)
    with pytest.raises(ValidationError):
        solve_lyapunov(P, np.eye(3))


def test_frobenius_inner():
    assert frobenius_inner(np.eye(2), np.eye(2)) == 2.0
    assert frobenius_inner(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])) == 11.0
    with pytest.raises(ValidationError):
        frobenius_inner(np.eye(2), np.eye(3))


def test_frobenius_symmetric(spd_pair):
    A, B = spd_pair
    assert frobenius_inner(A, B) == pytest.approx(frobenius_inner(B, A), rel=1e-15)
    assert frobenius_inner(A, A) >= 0


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
def test_exp_log_round_trip(seed, n):
    P = random_spd(np.random.default_rng(seed), n)
    assert rel_fro_error(expm_sym(logm_spd(P)), P) <= 1e-8


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
def test_sqrtm_square_and_orthogonal_congruence(seed, n):
    rng = np.random.default_rng(seed)
    P = random_spd(rng, n)
    S = sqrtm_spd(P)
    assert rel_fro_error(S @ S, P) <= 1e-8
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    assert rel_fro_error(sqrtm_spd(Q @ P @ Q.T), Q @ S @ Q.T) <= 1e-8


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
def test_lyapunov_residual_property(seed, n):
    rng = np.random.default_rng(seed)
    P = random_spd(rng, n)
    V = rng.standard_normal((n, n))
    V = V + V.T
    X = solve_lyapunov(P, V)
    assert np.linalg.norm(X @ P + P @ X - V) <= 1e-8 * max(np.linalg.norm(V), 1e-14)
