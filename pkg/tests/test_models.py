import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from condgeom import (
    EmpiricalDistribution,
    PositiveConditionalModel,
    l1_norm,
    make_positive_model,
    make_tangent,
    normalize_rows,
    project_to_tangent,
    rationalize,
    row_l1_norm,
)
from condgeom.errors import (
    BadShapeError,
    NonPositiveEntryError,
    NotNormalizedError,
    RowIndexOutOfRangeError,
    RowSumNotZeroError,
)
from condgeom.models import read_matrix_csv, write_matrix_csv

positive_matrices = st.tuples(st.integers(1, 5), st.integers(2, 5)).flatmap(
    lambda s: arrays(float, s, elements=st.floats(1e-3, 1e3))
)


def test_accepts_uniform_stochastic():
    M = make_positive_model([[0.5, 0.5], [0.5, 0.5]], normalized=True)
    assert M.shape == (2, 2) and M.normalized


def test_accepts_positive_non_normalized():
    M = make_positive_model([[1, 2], [3, 4]])
    assert not M.normalized


def test_rejects_zero_entry():
    with pytest.raises(NonPositiveEntryError) as exc:
        make_positive_model([[1, 0], [1, 1]])
    assert (exc.value.i, exc.value.j) == (0, 1)


@pytest.mark.parametrize("bad", [[[1.0]], [1.0, 2.0], [[1.0, np.inf]]])
def test_rejects_bad_shape(bad):
    with pytest.raises(BadShapeError):
        make_positive_model(bad)


def test_rejects_unnormalized_rows():
    with pytest.raises(NotNormalizedError) as exc:
        make_positive_model([[0.5, 0.5], [0.2, 0.7]], normalized=True)
    assert exc.value.row == 1


def test_entries_are_immutable():
    M = make_positive_model([[1, 2]])
    with pytest.raises(ValueError):
        M.entries[0, 0] = 5


def test_l1_norms():
    M = make_positive_model([[1, 2], [3, 4]])
    assert l1_norm(M) == 10
    assert row_l1_norm(M, 0) == 3
    assert l1_norm([[0.5, 0.5]]) == 1
    with pytest.raises(RowIndexOutOfRangeError):
        row_l1_norm(M, 2)


def test_normalized_model_has_norm_k(rng):
    x = rng.uniform(0.1, 1, size=(4, 3))
    assert l1_norm(normalize_rows(x)) == pytest.approx(4, abs=1e-12)


@given(positive_matrices)
def test_norm_is_additive_over_rows(x):
    M = PositiveConditionalModel(x)
    assert l1_norm(M) == pytest.approx(sum(row_l1_norm(M, i) for i in range(M.k)), rel=1e-12)


def test_normalize_rows_examples():
    np.testing.assert_allclose(normalize_rows([[1, 3]]).entries, [[0.25, 0.75]])
    np.testing.assert_allclose(normalize_rows([[2, 2], [1, 1]]).entries, [[0.5, 0.5]] * 2)
    M = make_positive_model([[0.2, 0.8]], normalized=True)
    np.testing.assert_array_equal(normalize_rows(M).entries, M.entries)


@given(positive_matrices)
def test_normalize_rows_is_a_fixed_point(x):
    once = normalize_rows(x)
    assert np.all(np.abs(once.entries.sum(axis=1) - 1) <= 1e-12)
    np.testing.assert_allclose(normalize_rows(once).entries, once.entries, rtol=1e-15, atol=1e-15)


def test_tangent_examples():
    u = make_tangent([[1 / 2, 1 / 2, -1], [1 / 3, -1 / 3, 0]], normalized_context=True)
    assert u.shape == (2, 3)
    make_tangent(np.zeros((2, 3)), normalized_context=True)
    with pytest.raises(RowSumNotZeroError) as exc:
        make_tangent([[1, 0]], normalized_context=True)
    assert exc.value.row == 0


@given(arrays(float, (3, 4), elements=st.floats(-1e3, 1e3)))
def test_projection_gives_valid_tangent(x):
    u = project_to_tangent(x)
    assert np.all(np.abs(u.coeffs.sum(axis=1)) <= 1e-9)


def test_rationalize_examples():
    r = rationalize([[0.5, 0.5]], 2)
    assert r.numerators.tolist() == [[1, 1]] and r.denominator == 2
    r = rationalize([[1, 2], [3, 4]], 1)
    assert r.numerators.tolist() == [[1, 2], [3, 4]] and r.denominator == 1
    r = rationalize([[0.33, 0.67]], 3)
    assert r.numerators.tolist() == [[1, 2]] and r.denominator == 3


def test_rationalize_clamps_to_one():
    assert rationalize([[1e-6, 1.0]], 2).numerators.tolist() == [[1, 2]]


@settings(max_examples=200)
@given(positive_matrices, st.integers(1, 50))
def test_rationalize_error_bound(x, extra):
    z = int(np.ceil(2 / x.min())) + extra
    r = rationalize(x, z)
    assert np.max(np.abs(r.numerators / z - x)) <= 1 / (2 * z) + 1e-12


def test_rational_model_to_fractions():
    from fractions import Fraction

    r = rationalize([[0.25, 0.75]], 4)
    assert r.to_fractions().tolist() == [[Fraction(1, 4), Fraction(3, 4)]]


def test_empirical_distribution_validation():
    EmpiricalDistribution([0.25, 0.75])
    with pytest.raises(Exception):
        EmpiricalDistribution([0.5, 0.6])
    with pytest.raises(Exception):
        EmpiricalDistribution([1.5, -0.5])


def test_csv_round_trip():
    x = np.array([[0.1, 0.9], [1 / 3, 2 / 3]])
    text = write_matrix_csv(x)
    np.testing.assert_array_equal(read_matrix_csv(io.StringIO(text)), x)


def test_csv_rejects_ragged_rows():
    with pytest.raises(BadShapeError):
        read_matrix_csv(io.StringIO("1,2\n3\n"))
