"""Dataset ingest, validation, and pairwise dissimilarities."""

import io
import math

import numpy as np
import pytest

from sca.dataset import (
    DataSet,
    Dissimilarity,
    load_dataset,
    pairwise_dissimilarity,
)
from sca.errors import ValidationError

from _util import gaussian_dataset


def _stream(text):
    return io.StringIO(text)


# --- load_dataset ----------------------------------------------------------

def test_load_three_by_two_no_response():
    data = load_dataset(_stream("a,b\n1,2\n3,4\n5,6\n"))
    assert data.n == 3 and data.d == 2
    assert data.response is None
    np.testing.assert_array_equal(data.points, [[1, 2], [3, 4], [5, 6]])
    assert data.ids == ("0", "1", "2")


def test_load_response_from_named_column():
    data = load_dataset(_stream("a,z\n1,0.5\n2,0.7\n"), response_column="z")
    assert data.d == 1
    np.testing.assert_array_equal(data.response, [0.5, 0.7])


def test_load_nan_cell_is_malformed_row():
    with pytest.raises(ValidationError, match="malformed row 2"):
        load_dataset(_stream("a,b\n1,2\nNaN,4\n5,6\n"))


def test_load_text_cell_is_malformed_row():
    with pytest.raises(ValidationError, match="malformed row 1"):
        load_dataset(_stream("a,b\nfoo,2\n3,4\n"))


def test_load_inf_cell_is_malformed_row():
    with pytest.raises(ValidationError, match="malformed row 1"):
        load_dataset(_stream("a,b\ninf,2\n3,4\n"))


def test_load_duplicate_ids_rejected():
    with pytest.raises(ValidationError, match="duplicate"):
        load_dataset(_stream("id,a\nx,1\nx,2\n"), id_column="id")


def test_load_single_row_rejected():
    with pytest.raises(ValidationError, match="at least 2"):
        load_dataset(_stream("a,b\n1,2\n"))


def test_load_missing_response_column():
    with pytest.raises(ValidationError, match="response column 'z'"):
        load_dataset(_stream("a,b\n1,2\n3,4\n"), response_column="z")


def test_load_tab_delimiter_detected():
    data = load_dataset(_stream("a\tb\n1\t2\n3\t4\n"))
    assert data.d == 2
    np.testing.assert_array_equal(data.points, [[1, 2], [3, 4]])


def test_load_id_column_used():
    data = load_dataset(_stream("id,a\nfirst,1\nsecond,2\n"), id_column="id")
    assert data.ids == ("first", "second")
    assert data.d == 1


def test_load_ragged_row_rejected():
    with pytest.raises(ValidationError, match="malformed row 2"):
        load_dataset(_stream("a,b\n1,2\n3\n"))


# --- DataSet invariants ----------------------------------------------------

def test_dataset_rejects_nonfinite_points():
    with pytest.raises(ValidationError, match="non-finite"):
        DataSet(points=[[1.0], [np.nan]], ids=("0", "1"))


def test_dataset_rejects_bad_response_length():
    with pytest.raises(ValidationError, match="response"):
        DataSet(points=[[1.0], [2.0]], ids=("0", "1"), response=[1.0])


def test_dataset_points_are_read_only():
    data = gaussian_dataset(4, 2, 0)
    with pytest.raises(ValueError):
        data.points[0, 0] = 99.0


# --- pairwise dissimilarities ----------------------------------------------

def test_sqeuclidean_hand_values():
    data = DataSet(points=[[0.0], [1.0], [3.0]], ids=("0", "1", "2"))
    d2 = pairwise_dissimilarity(data, Dissimilarity())
    np.testing.assert_array_equal(d2, [[0, 1, 9], [1, 0, 4], [9, 4, 0]])


def test_zero_diagonal_any_data():
    data = gaussian_dataset(9, 4, 1)
    for kind in ("sqeuclidean", "euclidean"):
        d = pairwise_dissimilarity(data, Dissimilarity(kind=kind))
        assert (np.diag(d) == 0).all()


def test_euclidean_matches_double_loop_oracle():
    data = gaussian_dataset(5, 3, 2)
    d = pairwise_dissimilarity(data, Dissimilarity(kind="euclidean"))
    pts = data.points
    for i in range(5):
        for j in range(5):
            expected = math.sqrt(sum((pts[i, k] - pts[j, k]) ** 2 for k in range(3)))
            assert d[i, j] == pytest.approx(expected, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("kind", ["sqeuclidean", "euclidean"])
def test_symmetry_nonnegativity_properties(seed, kind):
    data = gaussian_dataset(15, 3, seed)
    d = pairwise_dissimilarity(data, Dissimilarity(kind=kind))
    assert np.array_equal(d, d.T)
    assert (np.diag(d) == 0).all()
    assert d.min() >= 0


def test_squared_euclidean_is_square_of_euclidean():
    data = gaussian_dataset(12, 4, 3)
    sq = pairwise_dissimilarity(data, Dissimilarity(kind="sqeuclidean"))
    eu = pairwise_dissimilarity(data, Dissimilarity(kind="euclidean"))
    np.testing.assert_allclose(eu ** 2, sq, rtol=1e-12)


def test_user_table_roundtrip():
    table = np.array([[0.0, 2.0], [2.0, 0.0]])
    data = DataSet(points=[[0.0], [1.0]], ids=("0", "1"))
    d = pairwise_dissimilarity(data, Dissimilarity(kind="table", table=table))
    np.testing.assert_array_equal(d, table)


def test_user_table_dimension_mismatch():
    table = np.zeros((3, 3))
    data = DataSet(points=[[0.0], [1.0]], ids=("0", "1"))
    with pytest.raises(ValidationError, match="does not match"):
        pairwise_dissimilarity(data, Dissimilarity(kind="table", table=table))


def test_user_table_asymmetric_rejected():
    with pytest.raises(ValidationError, match="symmetric"):
        Dissimilarity(kind="table", table=[[0.0, 1.0], [2.0, 0.0]])


def test_user_table_negative_rejected():
    with pytest.raises(ValidationError, match="negative"):
        Dissimilarity(kind="table", table=[[0.0, -1.0], [-1.0, 0.0]])


def test_user_table_nonzero_diagonal_rejected():
    with pytest.raises(ValidationError, match="diagonal"):
        Dissimilarity(kind="table", table=[[1.0, 2.0], [2.0, 1.0]])


def test_unknown_kind_rejected():
    with pytest.raises(ValidationError, match="unknown dissimilarity kind"):
        Dissimilarity(kind="cosine")
