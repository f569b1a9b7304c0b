"""The invariant metric family on positive conditional models.

For a model ``M`` with total mass ``|M|`` and row masses ``|M_a|`` the basis
inner products are::

    g_M(d_ab, d_cd) = A(|M|) + [a == c] * (|M| / |M_a|) * B(|M|)
                             + [a == c][b == d] * (|M| / M_ab) * C(|M|)

``A``, ``B`` and ``C`` are smooth functions of the total mass.  The
"Fisher choice" ``A = B = 0``, ``C(t) = 1 / (2 t)`` is the metric whose
squared lengths match the second order expansion of the conditional
I-divergence.

Positive definiteness of the general family on the full cone is not
guaranteed; only the Fisher choice (and any ``A = B = 0`` with ``C > 0``) is
certified positive.  :func:`gram_matrix` is available as a diagnostic.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .models import (
    CONSTRAINT_TOL,
    as_array,
    same_shape,
)
from .errors import (
    GeometryError,
    IndexOutOfRangeError,
    NonPositiveArgumentError,
    NotNormalizedError,
    RowSumNotZeroError,
)

_KINDS = ("constant", "reciprocal", "power")


@dataclass(frozen=True)
class ScalarField:
    """A smooth function on the positive reals.

    ``constant(c)``: t -> c; ``reciprocal(c)``: t -> c / t;
    ``power(c, p)``: t -> c * t**p.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise GeometryError(f"unknown scalar field kind {self.kind!r}")
        want = 2 if self.kind == "power" else 1
        params = tuple(float(p) for p in self.params)
        if len(params) != want or not all(math.isfinite(p) for p in params):
            raise GeometryError(f"{self.kind} takes {want} finite parameter(s), got {self.params!r}")
        object.__setattr__(self, "params", params)

    def __call__(self, t):
        return eval_scalar(self, t)

    @property
    def coefficient(self):
        return self.params[0]

    def spec(self):
        if self.kind == "constant":
            return f"const:{self.params[0]!r}"
        if self.kind == "reciprocal":
            return f"recip:{self.params[0]!r}"
        return f"pow:{self.params[0]!r},{self.params[1]!r}"


def constant(c):
    return ScalarField("constant", (c,))


def reciprocal(c):
    return ScalarField("reciprocal", (c,))


def power(c, p):
    return ScalarField("power", (c, p))


def eval_scalar(f, t):
    if not t > 0:
        raise NonPositiveArgumentError(f"scalar fields are defined for t > 0, got {t!r}")
    if f.kind == "constant":
        return f.params[0]
    if f.kind == "reciprocal":
        return f.params[0] / t
    c, p = f.params
    return c * t**p


@dataclass(frozen=True)
class MetricParams:
    """The triple ``(A, B, C)``; ``C`` must be positive on the positive reals."""

    A: ScalarField
    B: ScalarField
    C: ScalarField

    def __post_init__(self):
        # every builtin kind is positive for t > 0 iff its leading coefficient is
        if not self.C.coefficient > 0:
            raise GeometryError("C must be strictly positive on the positive reals")

    @classmethod
    def fisher(cls):
        """``A = B = 0``, ``C(t) = 1 / (2 t)``."""
        return cls(constant(0.0), constant(0.0), reciprocal(0.5))

    @classmethod
    def cone(cls, c):
        """``A = B = 0``, ``C(t) = c / t``: the metric ``c * sum(u * v / M)``."""
        return cls(constant(0.0), constant(0.0), reciprocal(c))

    def at(self, total):
        return self.A(total), self.B(total), self.C(total)

    def spec(self):
        return f"abc:A={self.A.spec()};B={self.B.spec()};C={self.C.spec()}"


_FN = re.compile(r"^(const|recip|pow):(.+)$")


def _parse_field(text):
    m = _FN.match(text.strip())
    if not m:
        raise GeometryError(f"bad scalar field {text!r}")
    kind, args = m.groups()
    try:
        values = [float(v) for v in args.split(",")]
    except ValueError:
        raise GeometryError(f"bad scalar field arguments {args!r}") from None
    if kind == "const" and len(values) == 1:
        return constant(values[0])
    if kind == "recip" and len(values) == 1:
        return reciprocal(values[0])
    if kind == "pow" and len(values) == 2:
        return power(*values)
    raise GeometryError(f"wrong number of arguments in {text!r}")


def parse_metric_spec(text):
    """Parse ``"fisher"`` or ``"abc:A=<fn>;B=<fn>;C=<fn>"``.

    ``<fn>`` is one of ``const:<v>``, ``recip:<v>`` or ``pow:<c>,<p>``.
    """
    text = text.strip()
    if text == "fisher":
        return MetricParams.fisher()
    if not text.startswith("abc:"):
        raise GeometryError(f"unknown metric spec {text!r}")
    fields = {}
    for part in text[4:].split(";"):
        name, sep, value = part.partition("=")
        name = name.strip()
        if not sep or name not in ("A", "B", "C") or name in fields:
            raise GeometryError(f"bad metric spec component {part!r}")
        fields[name] = _parse_field(value)
    if set(fields) != {"A", "B", "C"}:
        raise GeometryError("metric spec needs A, B and C")
    return MetricParams(**fields)


def _check_index(shape, idx):
    a, b = idx
    if not (0 <= a < shape[0] and 0 <= b < shape[1]):
        raise IndexOutOfRangeError(f"index {idx} outside a {shape[0]} x {shape[1]} model")
    return a, b


def metric_basis(params, M, ab, cd):
    """Inner product ``g_M(d_ab, d_cd)`` of two coordinate basis vectors."""
    x = as_array(M)
    a, b = _check_index(x.shape, ab)
    c, d = _check_index(x.shape, cd)
    total = float(x.sum())
    A, B, C = params.at(total)
    g = A
    if a == c:
        g += total / x[a].sum() * B
        if b == d:
            g += total / x[a, b] * C
    return float(g)


def inner_product(params, M, u, v):
    """Bilinear extension of :func:`metric_basis` to arbitrary tangent vectors.

    Evaluated in closed form; equal to ``vec(u) @ gram_matrix(params, M) @ vec(v)``.
    """
    x, u, v = as_array(M), as_array(u), as_array(v)
    same_shape(x, u, v)
    total = x.sum()
    A, B, C = params.at(float(total))
    out = A * u.sum() * v.sum()
    out += B * total * np.sum(u.sum(axis=1) * v.sum(axis=1) / x.sum(axis=1))
    out += C * total * np.sum(u * v / x)
    return float(out)


def squared_length(params, M, u):
    return inner_product(params, M, u, u)


def _require_normalized(x, tol=CONSTRAINT_TOL):
    sums = x.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        raise NotNormalizedError(int(bad[0]), float(sums[bad[0]]))


def _require_zero_rows(u, tol=CONSTRAINT_TOL):
    sums = u.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums) > tol)
    if bad.size:
        raise RowSumNotZeroError(int(bad[0]), float(sums[bad[0]]))


def fisher_inner_product(M, u, v, scale):
    """``scale * sum(u * v / M)`` on the product of simplexes.

    For a metric in the family this is the restriction to normalized models,
    with ``scale = k * C(k)``; ``A`` and ``B`` drop out.
    """
    x, u, v = as_array(M), as_array(u), as_array(v)
    same_shape(x, u, v)
    _require_normalized(x)
    _require_zero_rows(u)
    _require_zero_rows(v)
    return float(scale * np.sum(u * v / x))


def gram_matrix(params, M):
    """The ``km x km`` matrix of basis inner products, in row-major index order.

    Entry ``(a*m + b, c*m + d)`` is ``metric_basis(params, M, (a, b), (c, d))``.
    Useful as a positive-definiteness diagnostic.
    """
    x = as_array(M)
    k, m = x.shape
    total = float(x.sum())
    A, B, C = params.at(total)
    same_row = np.kron(np.eye(k), np.ones((m, m)))
    row_term = np.repeat(total / x.sum(axis=1), m)
    G = A + B * same_row * row_term[:, None]
    G += np.diag(C * total / x.ravel())
    return G


def _nonnegative_pair(M, N):
    x, y = as_array(M), as_array(N)
    same_shape(x, y)
    if np.any(x < 0) or np.any(y < 0):
        raise GeometryError("geodesic distances need non-negative entries")
    return x, y


def geodesic_distance_cone(M, N, c):
    """Geodesic distance for ``A = B = 0``, ``C(t) = c / t``.

    That metric is ``c * sum(du**2 / M)``; the substitution ``M = s**2`` makes
    it Euclidean with factor ``4 c``, so the distance is
    ``2 sqrt(c) * ||sqrt(M) - sqrt(N)||``.  The formula extends continuously to
    non-negative matrices and is accepted there.
    """
    if not c > 0:
        raise NonPositiveArgumentError("c must be positive")
    x, y = _nonnegative_pair(M, N)
    return float(2.0 * math.sqrt(c) * np.linalg.norm(np.sqrt(x) - np.sqrt(y)))


def geodesic_distance_normalized(p, q, lam):
    """Geodesic distance of the product Fisher metric ``lam * sum(u v / p)``.

    Each simplex factor embeds in a sphere of radius 2, giving the per-row
    distance ``2 arccos(sum_j sqrt(p_ij q_ij))``; rows combine as a product
    manifold.
    """
    if not lam > 0:
        raise NonPositiveArgumentError("lam must be positive")
    x, y = _nonnegative_pair(p, q)
    _require_normalized(x)
    _require_normalized(y)
    bc = np.clip(np.sqrt(x * y).sum(axis=1), -1.0, 1.0)
    return float(math.sqrt(lam) * np.linalg.norm(2.0 * np.arccos(bc)))
