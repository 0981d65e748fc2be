import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from tddstring.errors import DimensionMismatch, NotPSD
from tddstring.linalg import canonical_j, check_symplectic, psd_sqrt, skew_exp

seeds = st.integers(min_value=0, max_value=2**31 - 1)


def test_sqrt_identity_and_diagonal():
    assert np.array_equal(psd_sqrt(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-15)


def test_sqrt_random_psd(rng):
    b = rng.standard_normal((6, 6))
    a = b.T @ b
    s = psd_sqrt(a)
    assert np.max(np.abs(s @ s - a)) <= 1e-12 * np.abs(a).max()
    assert np.linalg.eigvalsh(s).min() >= -1e-12


def test_sqrt_rejects_indefinite():
    with pytest.raises(NotPSD):
        psd_sqrt(np.diag([1.0, -0.5]))


def test_sqrt_clamps_roundoff():
    s = psd_sqrt(np.diag([1.0, -1e-14]))
    assert s[1, 1] == 0.0


def test_sqrt_stack():
    a = np.stack([np.diag([1.0, 4.0]), np.diag([9.0, 16.0])])
    np.testing.assert_allclose(psd_sqrt(a), np.stack([np.diag([1.0, 2.0]), np.diag([3.0, 4.0])]))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=7))
def test_sqrt_commutes_with_input(seed, n):
    b = np.random.default_rng(seed).standard_normal((n, n))
    a = b.T @ b
    s = psd_sqrt(a)
    assert np.max(np.abs(s @ a - a @ s)) <= 1e-10 * max(1.0, np.abs(a).max())


def test_skew_exp_zero_and_rotation():
    assert np.array_equal(skew_exp(np.zeros((3, 3)), 2.7), np.eye(3))
    a = np.array([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_allclose(skew_exp(a, np.pi / 2), a, atol=1e-15)


def test_skew_exp_against_pade(rng):
    b = rng.standard_normal((5, 5))
    a = b - b.T
    np.testing.assert_allclose(skew_exp(a, 0.7), expm(0.7 * a), atol=1e-12)


def test_skew_exp_matches_midpoint_steps():
    # oscillator generator K J Kᵀ, compared against many small Cayley steps
    K = np.diag([1.0, np.sqrt(2.0)])
    A = K @ canonical_j(1) @ K.T
    h, n = 1e-4, 10_000
    cay = np.linalg.solve(np.eye(2) - 0.5 * h * A, np.eye(2) + 0.5 * h * A)
    prop = np.linalg.matrix_power(cay, n)
    # midpoint phase error is O(h²); the 10-step route of the reference uses h=1e-4
    np.testing.assert_allclose(skew_exp(A, h * n), prop, atol=1e-8)
    step10 = np.linalg.matrix_power(cay, 10)
    np.testing.assert_allclose(skew_exp(A, 10 * h), step10, atol=1e-10)


def test_skew_exp_rejects_nonskew():
    with pytest.raises(DimensionMismatch):
        skew_exp(np.eye(2))


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_skew_exp_group_law_and_det(seed, t, s):
    b = np.random.default_rng(seed).standard_normal((4, 4))
    a = b - b.T
    lhs = skew_exp(a, t) @ skew_exp(a, s)
    assert np.max(np.abs(lhs - skew_exp(a, t + s))) <= 1e-10
    assert abs(np.linalg.det(skew_exp(a, t)) - 1) <= 1e-10


def test_symplectic_checks():
    assert check_symplectic(canonical_j(3))
    assert not check_symplectic(np.eye(4))
    assert not check_symplectic(0.5 * canonical_j(2))
