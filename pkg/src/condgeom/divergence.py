"""Conditional I-divergence and its quadratic approximation.

``D_r(p, q) = sum_x r(x) sum_y (p log(p / q) - p + q)``.  Expanding around
``q = p`` the first order terms vanish and the second order term is
``1/2 sum_xy r(x) eps(y,x)**2 / p(y|x)``, which is the squared length of
``r * eps`` at ``r * p`` under the Fisher choice ``A = B = 0, C(t) = 1/(2t)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, PerturbationLeavesConeError, ShapeMismatchError
from .metric import _require_normalized, geodesic_distance_cone
from .models import as_array

DEFAULT_T_LIST = (1e-1, 1e-2, 1e-3, 1e-4)
CANCELLATION_FLOOR = 1e-5


def _weights(r, k):
    w = as_array(r).ravel()
    if w.size != k:
        raise ShapeMismatchError(f"r has length {w.size}, models have {k} rows")
    return w


def _pair(r, p, q):
    p, q = as_array(p), as_array(q)
    if p.shape != q.shape or p.ndim != 2:
        raise ShapeMismatchError(f"shapes {p.shape} and {q.shape} differ")
    return _weights(r, p.shape[0]), p, q


def i_divergence(r, p, q, nonnegative=False):
    """Conditional I-divergence ``D_r(p, q)``.

    By default ``p`` and ``q`` must be strictly positive.  With
    ``nonnegative=True`` zero entries are allowed: ``0 log(0/q) = 0`` and a
    zero in ``q`` against a positive ``p`` gives ``math.inf``.
    """
    w, p, q = _pair(r, p, q)
    if nonnegative:
        if np.any(p < 0) or np.any(q < 0):
            raise GeometryError("entries must be non-negative")
    elif np.any(p <= 0) or np.any(q <= 0):
        raise GeometryError("entries must be strictly positive (pass nonnegative=True)")
    live = w > 0
    p, q, w = p[live], q[live], w[live]
    if np.any((q == 0) & (p > 0)):
        return math.inf
    d = q - p
    term = d.copy()
    pos = p > 0
    # p log(p/q) - p + q == d - p log1p(d/p), stable for q close to p
    term[pos] = d[pos] - p[pos] * np.log1p(d[pos] / p[pos])
    return float(np.sum(w[:, None] * term))


def quadratic_form(r, p, eps):
    """``1/2 sum_xy r(x) eps(y,x)**2 / p(y|x)``; rows with ``r(x) = 0`` are skipped."""
    w, p, e = _pair(r, p, eps)
    live = w > 0
    p, e, w = p[live], e[live], w[live]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(e == 0, 0.0, e**2 / p)
    return float(0.5 * np.sum(w[:, None] * terms))


@dataclass(frozen=True)
class DivergenceReport:
    scale: float
    divergence: float
    quadratic: float
    abs_error: float
    cancellation_dominated: bool = False

    def to_dict(self):
        return {
            "t": self.scale,
            "divergence": self.divergence,
            "quadratic": self.quadratic,
            "abs_error": self.abs_error,
            "cancellation_dominated": self.cancellation_dominated,
        }


def taylor_report(r, p, eps, t_list=DEFAULT_T_LIST):
    """Compare ``D_r(p, p + t eps)`` against its quadratic term for each ``t``.

    The gap is ``O(t**3)``.  Scales below ``1e-5`` are flagged: there the gap
    is swamped by rounding.
    """
    w, p, e = _pair(r, p, eps)
    out = []
    for t in t_list:
        q = p + t * e
        if np.any(q <= 0):
            raise PerturbationLeavesConeError(t)
        D = i_divergence(w, p, q)
        quad = quadratic_form(w, p, t * e)
        out.append(DivergenceReport(t, D, quad, abs(D - quad), t < CANCELLATION_FLOOR))
    return out


def reports_to_json(reports):
    return json.dumps([rep.to_dict() for rep in reports])


def weighted_model(r, p):
    """The joint-like matrix ``r(x) p(y|x)``; zero-weight rows stay as zero rows."""
    w = _weights(r, as_array(p).shape[0])
    return w[:, None] * as_array(p)


@dataclass(frozen=True)
class GeodesicComparison:
    divergence: float
    half_sq_distance: float
    ratio: float


def divergence_vs_geodesic(r, p, q):
    """Set ``D_r(p, q)`` against the squared geodesic distance of ``r p`` and ``r q``.

    ``half_sq_distance`` is ``d**2 / 2`` for the cone metric ``sum(u v / M)``,
    which equals the squared distance under the Fisher choice; ``ratio``
    tends to 1 as ``q -> p`` and is 1 by convention when both vanish.
    """
    w, p, q = _pair(r, p, q)
    _require_normalized(p)
    _require_normalized(q)
    D = i_divergence(w, p, q, nonnegative=True)
    half_sq = 0.5 * geodesic_distance_cone(weighted_model(w, p), weighted_model(w, q), 1.0) ** 2
    if half_sq == 0.0:
        ratio = 1.0 if D == 0.0 else math.inf
    else:
        ratio = D / half_sq
    return GeodesicComparison(D, half_sq, ratio)
