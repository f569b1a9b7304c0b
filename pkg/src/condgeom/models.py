"""Value types for conditional models and their tangent vectors.

A conditional model over finite spaces ``X`` (size k) and ``Y`` (size m) is a
k x m matrix with ``M[i, j] = p(y_j | x_i)``.  Normalized models are row
stochastic; the general case is any strictly positive matrix.  All indices are
zero-based.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import (
    BadShapeError,
    GeometryError,
    NonPositiveEntryError,
    NotNormalizedError,
    RowIndexOutOfRangeError,
    RowSumNotZeroError,
    ShapeMismatchError,
)

CONSTRAINT_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_rows_sum(a, target, tol, error):
    sums = a.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - target) > tol)
    if bad.size:
        raise error(int(bad[0]), float(sums[bad[0]]))


@dataclass(frozen=True, eq=False)
class PositiveConditionalModel:
    """A strictly positive k x m matrix, optionally row normalized."""

    entries: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2:
            raise BadShapeError(f"expected a 2-d matrix, got shape {a.shape}")
        k, m = a.shape
        if k < 1 or m < 2:
            raise BadShapeError(f"need k >= 1 and m >= 2, got {k} x {m}")
        if not np.all(np.isfinite(a)):
            raise BadShapeError("entries must be finite")
        bad = np.argwhere(a <= 0)
        if bad.size:
            i, j = (int(x) for x in bad[0])
            raise NonPositiveEntryError(i, j, float(a[i, j]))
        if self.normalized:
            _check_rows_sum(a, 1.0, CONSTRAINT_TOL, NotNormalizedError)
        object.__setattr__(self, "entries", _frozen(a))

    @property
    def shape(self):
        return self.entries.shape

    @property
    def k(self):
        return self.entries.shape[0]

    @property
    def m(self):
        return self.entries.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, PositiveConditionalModel):
            return NotImplemented
        return self.normalized == other.normalized and np.array_equal(
            self.entries, other.entries
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Coefficients of a tangent vector in the basis ``{d_ij}``.

    In a normalized context (tangent to the product of simplexes) every row of
    coefficients sums to zero.
    """

    coeffs: np.ndarray
    normalized_context: bool = False

    def __post_init__(self):
        a = np.asarray(self.coeffs, dtype=float)
        if a.ndim != 2:
            raise BadShapeError(f"expected a 2-d matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise BadShapeError("coefficients must be finite")
        if self.normalized_context:
            _check_rows_sum(a, 0.0, CONSTRAINT_TOL, RowSumNotZeroError)
        object.__setattr__(self, "coeffs", _frozen(a))

    @property
    def shape(self):
        return self.coeffs.shape

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coeffs, dtype=dtype)


@dataclass(frozen=True, eq=False)
class RationalConditionalModel:
    """Exact representation ``M = numerators / denominator`` with integer numerators >= 1."""

    numerators: np.ndarray
    denominator: int

    def __post_init__(self):
        a = np.asarray(self.numerators)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 2:
            raise BadShapeError(f"need a k x m integer matrix with m >= 2, got {a.shape}")
        if a.dtype.kind not in "iu":
            if not np.all(np.asarray(a, dtype=float) == np.round(np.asarray(a, dtype=float))):
                raise GeometryError("numerators must be integers")
            a = a.astype(np.int64)
        bad = np.argwhere(a < 1)
        if bad.size:
            i, j = (int(x) for x in bad[0])
            raise NonPositiveEntryError(i, j, int(a[i, j]))
        z = int(self.denominator)
        if z < 1 or z != self.denominator:
            raise GeometryError(f"denominator must be a positive integer, got {self.denominator!r}")
        a = np.array(a, dtype=np.int64)
        a.setflags(write=False)
        object.__setattr__(self, "numerators", a)
        object.__setattr__(self, "denominator", z)

    @property
    def shape(self):
        return self.numerators.shape

    def row_totals(self):
        """Integer row sums ``|M~_i|``."""
        return [int(s) for s in self.numerators.sum(axis=1)]

    def to_fractions(self):
        """Object array of exact :class:`fractions.Fraction` entries."""
        z = self.denominator
        return np.array(
            [[Fraction(int(v), z) for v in row] for row in self.numerators], dtype=object
        )

    def to_model(self):
        return PositiveConditionalModel(self.numerators / self.denominator)


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """A probability vector ``r`` over the k explanatory values."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise BadShapeError(f"expected a non-empty 1-d vector, got shape {w.shape}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise GeometryError("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > CONSTRAINT_TOL:
            raise GeometryError(f"weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "weights", _frozen(w))

    def __len__(self):
        return self.weights.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)


def as_array(x):
    """Float array view of a model, tangent, distribution or array-like."""
    if isinstance(x, PositiveConditionalModel):
        return x.entries
    if isinstance(x, TangentVector):
        return x.coeffs
    if isinstance(x, EmpiricalDistribution):
        return x.weights
    return np.asarray(x, dtype=float)


def same_shape(*arrays):
    shape = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != shape:
            raise ShapeMismatchError(f"shapes {shape} and {a.shape} differ")
    return shape


def make_positive_model(entries, normalized=False):
    return PositiveConditionalModel(entries, normalized=normalized)


def make_tangent(coeffs, normalized_context=False):
    return TangentVector(coeffs, normalized_context=normalized_context)


def project_to_tangent(coeffs):
    """Subtract row means so the result is tangent to the product of simplexes."""
    a = np.asarray(coeffs, dtype=float)
    return TangentVector(a - a.mean(axis=1, keepdims=True), normalized_context=True)


def l1_norm(M):
    """``|M|``, the sum of all entries."""
    return float(as_array(M).sum())


def row_l1_norm(M, i):
    """``|M_i|``, the sum of row ``i``."""
    a = as_array(M)
    if not 0 <= i < a.shape[0]:
        raise RowIndexOutOfRangeError(f"row {i} out of range for {a.shape[0]} rows")
    return float(a[i].sum())


def normalize_rows(M):
    a = as_array(M)
    return PositiveConditionalModel(a / a.sum(axis=1, keepdims=True), normalized=True)


def is_normalized(M, tol=CONSTRAINT_TOL):
    a = as_array(M)
    return bool(np.all(np.abs(a.sum(axis=1) - 1.0) <= tol))


def rationalize(M, z):
    """Round ``z * M`` to integers, clamping every numerator to at least 1."""
    z = int(z)
    if z < 1:
        raise GeometryError("z must be a positive integer")
    nums = np.maximum(np.rint(z * as_array(M)), 1).astype(np.int64)
    return RationalConditionalModel(nums, z)


def read_matrix_csv(source):
    """Read a header-less CSV matrix, one row per explanatory value.

    ``source`` is a path or an open text stream.  Ragged rows are rejected.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_matrix_csv(fh)
    rows = [r for r in csv.reader(source) if r and any(c.strip() for c in r)]
    if not rows:
        raise BadShapeError("empty matrix file")
    width = len(rows[0])
    for n, r in enumerate(rows):
        if len(r) != width:
            raise BadShapeError(f"ragged CSV: row {n} has {len(r)} fields, expected {width}")
    try:
        return np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise BadShapeError(f"non-numeric CSV entry: {exc}") from None


def write_matrix_csv(M, dest=None):
    """Write a matrix as CSV; returns the text when ``dest`` is None."""
    a = np.atleast_2d(as_array(M))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in a:
        w.writerow([repr(float(v)) for v in row])
    text = buf.getvalue()
    if dest is None:
        return text
    Path(dest).write_text(text)
    return None
