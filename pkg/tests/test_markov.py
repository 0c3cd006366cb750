"""Transition-matrix construction and the stationary distribution."""

import math

import numpy as np
import pytest

from sca.errors import NumericalError, ValidationError
from sca.markov import (
    build_transition,
    default_epsilon,
    stationary_distribution,
)

from _util import gaussian_dataset, pipeline


def _dmat_from_points(points):
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    return np.array([[np.sum((pts[i] - pts[j]) ** 2) for j in range(n)]
                     for i in range(n)])


# --- build_transition ------------------------------------------------------

def test_zero_dissimilarity_gives_uniform_chain():
    t = build_transition(np.zeros((2, 2)), epsilon=3.7)
    np.testing.assert_array_equal(t.matrix, [[0.5, 0.5], [0.5, 0.5]])


def test_scalar_loop_oracle_three_points():
    # points {0, 1, 3}, squared euclidean, epsilon = 2
    dmat = _dmat_from_points([[0.0], [1.0], [3.0]])
    t = build_transition(dmat, epsilon=2.0)
    for i in range(3):
        weights = [math.exp(-dmat[i, j] / 2.0) for j in range(3)]
        total = sum(weights)
        for j in range(3):
            assert t.matrix[i, j] == pytest.approx(weights[j] / total, rel=1e-14)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_rows_sum_to_one(seed):
    data = gaussian_dataset(20, 3, seed)
    _, t, _ = pipeline(data)
    assert np.abs(t.matrix.sum(axis=1) - 1.0).max() <= 1e-12


def test_entries_in_unit_interval():
    data = gaussian_dataset(15, 2, 5)
    _, t, _ = pipeline(data)
    assert t.matrix.min() > 0
    assert t.matrix.max() <= 1


def test_nonpositive_epsilon_rejected():
    with pytest.raises(ValidationError, match="epsilon"):
        build_transition(np.zeros((2, 2)), epsilon=0.0)


def test_entry_underflow_raises_with_row():
    dmat = _dmat_from_points([[0.0], [1.0], [100.0]])
    with pytest.raises(NumericalError, match="row 0"):
        build_transition(dmat, epsilon=1e-3)


def test_asymmetric_matrix_rejected():
    bad = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ValidationError, match="symmetric"):
        build_transition(bad, epsilon=1.0)


def test_cutoff_flag_sparsifies():
    data = gaussian_dataset(12, 2, 7)
    dmat, dense, _ = pipeline(data)
    sparse = build_transition(dmat, dense.epsilon, cutoff=1.0)
    assert (sparse.matrix == 0).any()
    assert np.abs(sparse.matrix.sum(axis=1) - 1.0).max() <= 1e-12


def test_uniform_limit_as_epsilon_grows():
    data = gaussian_dataset(14, 3, 8)
    dmat, _, _ = pipeline(data)
    t = build_transition(dmat, epsilon=1e12 * dmat.max())
    assert np.abs(t.matrix - 1.0 / 14).max() <= 1e-6


# --- default_epsilon -------------------------------------------------------

def test_default_epsilon_median_of_three():
    dmat = np.array([[0.0, 1.0, 9.0], [1.0, 0.0, 4.0], [9.0, 4.0, 0.0]])
    assert default_epsilon(dmat) == 4.0


def test_default_epsilon_identical_points_rejected():
    with pytest.raises(ValidationError, match="degenerate"):
        default_epsilon(np.zeros((3, 3)))


def test_default_epsilon_matches_sort_oracle():
    data = gaussian_dataset(20, 3, 9)
    dmat, _, _ = pipeline(data)
    upper = sorted(dmat[i, j] for i in range(20) for j in range(i + 1, 20))
    assert len(upper) == 190
    oracle = 0.5 * (upper[94] + upper[95])
    assert default_epsilon(dmat) == pytest.approx(oracle, rel=1e-15)


# --- stationary distribution -----------------------------------------------

def test_stationary_uniform_chain():
    t = build_transition(np.zeros((2, 2)), epsilon=1.0)
    phi0 = stationary_distribution(t)
    np.testing.assert_array_equal(phi0.probabilities, [0.5, 0.5])


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_stationary_left_eigenvector_residual(seed):
    data = gaussian_dataset(18, 3, seed)
    _, t, _ = pipeline(data)
    phi0 = stationary_distribution(t).probabilities
    assert phi0.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.abs(phi0 @ t.matrix - phi0).max() <= 1e-10


def test_stationary_matches_matrix_power_oracle():
    data = gaussian_dataset(10, 2, 4)
    _, t, _ = pipeline(data)
    phi0 = stationary_distribution(t).probabilities
    row = np.linalg.matrix_power(t.matrix, 512)[0]
    oracle = row / row.sum()
    assert np.abs(phi0 - oracle).max() <= 1e-8


def test_power_iteration_matches_closed_form():
    data = gaussian_dataset(16, 3, 6)
    _, t, _ = pipeline(data)
    closed = stationary_distribution(t, method="closed-form").probabilities
    power = stationary_distribution(t, method="power").probabilities
    assert np.abs(power / closed - 1.0).max() <= 1e-10


def test_stationary_strictly_positive():
    data = gaussian_dataset(12, 2, 10)
    _, t, _ = pipeline(data)
    assert stationary_distribution(t).probabilities.min() > 0


def test_power_iteration_budget_error():
    data = gaussian_dataset(12, 2, 11)
    _, t, _ = pipeline(data)
    with pytest.raises(NumericalError, match="converge"):
        stationary_distribution(t, method="power", max_iter=1, tol=1e-16)
