import numpy as np
import pytest

from hierband.matrix import (
    apply_taper,
    as_symmetric,
    bandwidth,
    frobenius_dist,
    norm_21,
    norm_2inf,
    offdiag_inner,
    operator_dist,
    operator_norm,
    sample_covariance,
    subdiag_indices,
    subdiag_norm,
    subdiag_norms,
)
from hierband.weights import WeightScheme


def test_subdiag_indices_corner_pair():
    assert subdiag_indices(5, 1) == [(1, 5), (5, 1)]


def test_subdiag_indices_diagonal():
    assert subdiag_indices(5, 5) == [(j, j) for j in range(1, 6)]


def test_subdiag_indices_brute_force():
    p, m = 4, 2
    want = sorted((j, k) for j in range(1, p + 1) for k in range(1, p + 1) if abs(j - k) == p - m)
    assert subdiag_indices(p, m) == want == [(1, 3), (2, 4), (3, 1), (4, 2)]


@pytest.mark.parametrize("m", [0, 6, -1])
def test_subdiag_indices_range(m):
    with pytest.raises(ValueError):
        subdiag_indices(5, m)


@pytest.mark.parametrize("p", [1, 2, 5, 9])
def test_subdiagonals_partition_the_matrix(p):
    seen = [pair for m in range(1, p + 1) for pair in subdiag_indices(p, m)]
    assert len(seen) == p * p == len(set(seen))
    for m in range(1, p):
        assert len(subdiag_indices(p, m)) == 2 * m


def test_subdiag_norm_examples():
    assert subdiag_norm(np.eye(4), 2) == 0.0
    M = np.array([[1.0, 0.5], [0.5, 1.0]])
    assert subdiag_norm(M, 1) == pytest.approx(np.sqrt(0.5), abs=1e-12)
    M3 = np.ones((3, 3))
    assert subdiag_norm(M3, 2) == pytest.approx(2.0, abs=1e-12)


def test_subdiag_norms_vector_matches_scalar():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 6))
    A = A + A.T
    assert np.allclose(subdiag_norms(A), [subdiag_norm(A, m) for m in range(1, 6)], atol=1e-14)


def test_sample_covariance_examples():
    assert np.array_equal(sample_covariance(np.array([[1.0, 2.0], [1.0, 2.0]])), np.zeros((2, 2)))
    assert np.allclose(sample_covariance(np.array([[1.0, 0.0], [-1.0, 0.0]])), [[1.0, 0.0], [0.0, 0.0]])
    assert np.array_equal(sample_covariance(np.array([[3.0, -1.0, 2.0]])), np.zeros((3, 3)))


def test_sample_covariance_uses_1_over_n():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((7, 3))
    assert np.allclose(sample_covariance(X), np.cov(X.T, bias=True), atol=1e-14)
    assert np.allclose(sample_covariance(X, center=False), X.T @ X / 7, atol=1e-14)


def test_sample_covariance_rejects_bad_input():
    with pytest.raises(ValueError):
        sample_covariance(np.empty((0, 3)))
    with pytest.raises(ValueError):
        sample_covariance(np.array([[1.0, np.nan]]))


def test_norms_examples():
    W = WeightScheme("general", 2)
    assert (norm_21(np.diag([1.0, 2.0]), W), norm_2inf(np.diag([1.0, 2.0]), W)) == (0.0, 0.0)
    M = np.array([[1.0, 0.5], [0.5, 1.0]])
    assert norm_21(M, W) == pytest.approx(1.0, abs=1e-12)
    assert norm_2inf(M, W) == pytest.approx(0.5, abs=1e-12)


def test_distances():
    A = np.zeros((2, 2))
    assert frobenius_dist(A, A) == 0.0 and operator_dist(A, A) == 0.0
    D = np.diag([3.0, -4.0])
    assert frobenius_dist(D, A) == pytest.approx(5.0)
    assert operator_dist(D, A) == pytest.approx(4.0)
    assert operator_dist(np.ones((2, 2)), A) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        frobenius_dist(np.eye(2), np.eye(3))


def test_operator_norm_power_iteration_branch():
    rng = np.random.default_rng(1)
    p = 600
    B = rng.standard_normal((p, p)) / np.sqrt(p)
    M = B + B.T
    exact = np.max(np.abs(np.linalg.eigvalsh(M)))
    assert operator_norm(M) == pytest.approx(exact, rel=1e-6)


def test_as_symmetric_rejects_asymmetric():
    with pytest.raises(ValueError):
        as_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_apply_taper_and_bandwidth():
    S = np.arange(16.0).reshape(4, 4)
    S = S + S.T
    T = apply_taper(S, np.array([0.0, 0.5, 1.0]))
    assert T[0, 3] == 0.0 and T[3, 0] == 0.0
    assert T[0, 2] == 0.5 * S[0, 2]
    assert T[0, 1] == S[0, 1]
    assert np.array_equal(np.diagonal(T), np.diagonal(S))
    assert bandwidth(T) == 2
    assert bandwidth(np.eye(3)) == 0


def test_offdiag_inner_ignores_diagonal():
    A = np.array([[5.0, 1.0], [1.0, 7.0]])
    assert offdiag_inner(A, A) == 2.0
