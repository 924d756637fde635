"""Bregman and Alpha Log-Det divergences."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geomlearn.divergences import (
    NEG_LOG,
    NEG_LOGDET,
    SQUARED_NORM,
    alpha_divergence,
    alpha_logdet,
    bregman,
    check_dual_symmetry,
    fan_gap,
)
from geomlearn.errors import DomainError, ValidationError
from geomlearn.matfun import random_spd


def test_bregman_examples():
    x, y = np.array([1.0, 2.0, -1.0]), np.array([0.5, -1.0, 3.0])
    assert bregman(SQUARED_NORM, x, y) == pytest.approx(np.sum((x - y) ** 2), rel=1e-14)
    assert bregman(SQUARED_NORM, x, x) == 0.0
    assert bregman(NEG_LOG, [2.0], [1.0]) == pytest.approx(0.3068528194400547, rel=1e-14)
    with pytest.raises(DomainError):
        bregman(NEG_LOG, [-1.0], [1.0])


def test_alpha_divergence_limits(rng):
    x, y = rng.uniform(0.5, 3, 4), rng.uniform(0.5, 3, 4)
    assert alpha_divergence(NEG_LOG, 0.4, x, x) == pytest.approx(0.0, abs=1e-14)
    assert alpha_divergence(NEG_LOG, 1.0, x, y) == bregman(NEG_LOG, x, y)
    assert alpha_divergence(NEG_LOG, -1.0, x, y) == bregman(NEG_LOG, y, x)
    assert alpha_divergence(NEG_LOG, 1 - 1e-5, x, y) == pytest.approx(bregman(NEG_LOG, x, y), rel=1e-4)
    with pytest.raises(ValidationError):
        alpha_divergence(NEG_LOG, 1.5, x, y)


def test_alpha_divergence_matches_bregman_mixture(rng):
    # d^a = 4/(1-a^2) [w1 B(x, m) + w2 B(y, m)], m = w1 x + w2 y
    x, y = rng.standard_normal(5), rng.standard_normal(5)
    for a in (-0.7, 0.0, 0.3):
        w1, w2 = (1 - a) / 2, (1 + a) / 2
        m = w1 * x + w2 * y
        expected = 4 / (1 - a * a) * (w1 * bregman(SQUARED_NORM, x, m) + w2 * bregman(SQUARED_NORM, y, m))
        assert alpha_divergence(SQUARED_NORM, a, x, y) == pytest.approx(expected, rel=1e-12)


def test_alpha_logdet_examples(rng):
    A = random_spd(rng, 3)
    for a in (-1.0, -0.5, 0.0, 0.5, 1.0):
        assert alpha_logdet(a, A, A) == pytest.approx(0.0, abs=1e-10)
    assert alpha_logdet(0.0, [[4.0]], [[1.0]]) == pytest.approx(0.8925742052568391, rel=1e-13)
    assert alpha_logdet(1.0, [[2.0]], [[1.0]]) == pytest.approx(0.3068528194400547, rel=1e-13)
    assert alpha_logdet(-1.0, [[1.0]], [[2.0]]) == pytest.approx(0.3068528194400547, rel=1e-13)
    with pytest.raises(ValidationError):
        alpha_logdet(0.0, np.eye(2), np.eye(3))


def test_alpha_logdet_limit_formula_by_hand(rng):
    A, B = random_spd(rng, 4), random_spd(rng, 4)
    M = np.linalg.solve(B, A)
    expected = np.trace(M - np.eye(4)) - np.log(np.linalg.det(M))
    assert alpha_logdet(1.0, A, B) == pytest.approx(expected, rel=1e-10)
    M = np.linalg.solve(A, B)
    expected = np.trace(M - np.eye(4)) - np.log(np.linalg.det(M))
    assert alpha_logdet(-1.0, A, B) == pytest.approx(expected, rel=1e-10)


def test_dual_symmetry_examples(rng):
    A, B = random_spd(rng, 3), random_spd(rng, 3)
    assert check_dual_symmetry(0.0, A, B) == 0.0
    assert alpha_logdet(0.0, A, B) == alpha_logdet(0.0, B, A)
    assert check_dual_symmetry(1.0, A, B) <= 1e-10
    assert abs(alpha_logdet(0.5, A, B) - alpha_logdet(0.5, B, A)) > 1e-6


@settings(max_examples=1000, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6), alpha=st.floats(-1, 1))
def test_alpha_logdet_properties(seed, n, alpha):
    rng = np.random.default_rng(seed)
    A, B = random_spd(rng, n), random_spd(rng, n)
    assert alpha_logdet(alpha, A, B) >= -1e-10
    assert abs(alpha_logdet(alpha, A, A)) <= 1e-9
    assert check_dual_symmetry(alpha, A, B) <= 1e-10


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6))
def test_limit_continuity(seed, n):
    # relative spectra stay within [1/25, 25]; see test_limit_truncation_model
    rng = np.random.default_rng(seed)
    A, B = random_spd(rng, n, cond=5, log_scale=0), random_spd(rng, n, cond=5, log_scale=0)
    for s in (1.0, -1.0):
        d1 = alpha_logdet(s, A, B)
        assert abs(alpha_logdet(s * (1 - 1e-4), A, B) - d1) <= 1e-3 * (1 + abs(d1))


def test_limit_truncation_model():
    # d^{1-2e}(c, 1) - d^1(c, 1) = e[(c - 1 - log c) - (c - 1)^2 / 2] + O(e^2) per eigenvalue
    for c in (0.01, 0.5, 3.0, 40.0, 250.0):
        e = 5e-5
        d1 = c - 1 - np.log(c)
        predicted = e * (d1 - (c - 1) ** 2 / 2)
        got = alpha_logdet(1 - 2 * e, [[c]], [[1.0]]) - d1
        assert got == pytest.approx(predicted, rel=0.02, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5), alpha=st.floats(-0.999, 0.999))
def test_generic_alpha_specializes_to_logdet(seed, n, alpha):
    rng = np.random.default_rng(seed)
    A, B = random_spd(rng, n), random_spd(rng, n)
    d = alpha_logdet(alpha, A, B)
    assert alpha_divergence(NEG_LOGDET, alpha, A, B) == pytest.approx(d, rel=1e-10, abs=1e-10)


def test_generic_limit_specializes_to_logdet(rng):
    A, B = random_spd(rng, 4), random_spd(rng, 4)
    for a in (1.0, -1.0):
        assert alpha_divergence(NEG_LOGDET, a, A, B) == pytest.approx(alpha_logdet(a, A, B), rel=1e-10)


def test_fan_inequality(rng):
    for _ in range(1000):
        n = rng.integers(1, 7)
        A, B = random_spd(rng, n), random_spd(rng, n)
        assert fan_gap(A, B) >= -1e-12
        assert fan_gap(A, B, rng.uniform()) >= -1e-12


def test_midpoint_convexity(rng):
    for _ in range(50):
        A, B = random_spd(rng, 3), random_spd(rng, 3)
        assert NEG_LOGDET.midpoint_gap(A, B) > 0
