"""Randomized certification suites for the invariance properties.

Each suite draws ``trials`` independent cases from per-trial generators
seeded by ``(seed, trial)`` and records the worst error and every failure.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .divergence import i_divergence, quadratic_form, weighted_model
from .errors import SizeCapExceededError, UnknownSuiteError
from .metric import (
    MetricParams,
    fisher_inner_product,
    geodesic_distance_cone,
    inner_product,
    squared_length,
)
from .models import RationalConditionalModel, l1_norm
from .morphism import (
    DEFAULT_SIZE_CAP,
    apply_morphism,
    apply_morphism_rational,
    check_isometry,
    rational_uniformizer,
)
from .sampling import (
    random_metric_params,
    random_model,
    random_morphism_bounded,
    random_scalar_field,
    random_zero_row_tangent,
    trial_rng,
)

DEFAULT_TOL = {
    "isometry": 1e-9,
    "norm": 1e-12,
    "prop3": 0.0,
    "corollary1": 1e-10,
    "taylor": 1e-12,
    "geodesic": 1e-10,
}
SUITES = tuple(DEFAULT_TOL)
TAYLOR_SWEEP = (1e-1, 1e-2, 1e-3, 1e-4)
TAYLOR_SPREAD = 4.0


@dataclass
class SuiteReport:
    suite: str
    trials: int
    seed: int
    tol: float
    max_error: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return {
            "suite": self.suite,
            "trials": self.trials,
            "seed": self.seed,
            "tol": self.tol,
            "max_error": self.max_error,
            "failures": self.failures,
            "pass": self.passed,
        }


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _isometry_trial(rng, tol, bounds, metric):
    f = random_morphism_bounded(rng, *bounds)
    M = random_model(f.k, f.m, rng)
    params = metric or random_metric_params(rng)
    rep = check_isometry(f, params, M, tol)
    err = rep.max_rel_error
    return err, None if rep.passed else f"pair {rep.worst_pair}, metric {params.spec()}"


def _norm_trial(rng, tol, bounds, metric):
    f = random_morphism_bounded(rng, *bounds)
    M = random_model(f.k, f.m, rng)
    err = abs(l1_norm(apply_morphism(f, M)) - l1_norm(M))
    return err, None if err <= tol else f"{f!r}: |f(M)| - |M| = {err:.3e}"


def uniformizer_exact_check(numerators, z, size_cap=DEFAULT_SIZE_CAP):
    """Number of entries of the uniformized image that differ from ``1 / (z P)``.

    Compared exactly on reduced integer fractions.
    """
    Mr = RationalConditionalModel(numerators, z)
    f = rational_uniformizer(Mr, size_cap)
    num, den = apply_morphism_rational(f, Mr)
    target = Fraction(1, z * math.prod(Mr.row_totals()))
    expected_shape = (sum(Mr.row_totals()), math.prod(Mr.row_totals()))
    if num.shape != expected_shape:
        return num.size or 1
    return int(np.count_nonzero((num != target.numerator) | (den != target.denominator)))


def _uniformizer_trial(rng, tol, bounds, metric, size_cap=DEFAULT_SIZE_CAP, emax=4):
    kmax, mmax = bounds[0], bounds[1]
    k = int(rng.integers(1, kmax + 1))
    m = int(rng.integers(2, mmax + 1))
    nums = rng.integers(1, emax + 1, size=(k, m))
    z = int(rng.integers(1, 11))
    try:
        bad = uniformizer_exact_check(nums, z, size_cap)
    except SizeCapExceededError as exc:
        return math.inf, f"SizeCapExceeded: {exc}"
    return float(bad), None if bad == 0 else f"{bad} inexact entries for {nums.tolist()}, z={z}"


def _reduction_trial(rng, tol, bounds, metric):
    k = int(rng.integers(1, bounds[0] + 1))
    m = int(rng.integers(2, bounds[1] + 1))
    M = random_model(k, m, rng, normalized=True)
    u = random_zero_row_tangent(k, m, rng)
    v = random_zero_row_tangent(k, m, rng)
    C = metric.C if metric else random_scalar_field(rng, positive=True)
    reference = fisher_inner_product(M, u, v, k * C(k))
    worst = 0.0
    for _ in range(5):
        params = MetricParams(random_scalar_field(rng), random_scalar_field(rng), C)
        worst = max(worst, _rel(inner_product(params, M, u, v), reference))
    return worst, None if worst <= tol else f"k={k}, m={m}: rel error {worst:.3e}"


def taylor_sweep_spread(r, p, eps, t_list=TAYLOR_SWEEP):
    """Max over min of ``|D - quadratic| / t**3`` across the sweep."""
    ratios = [
        abs(i_divergence(r, p, p + t * eps) - quadratic_form(r, p, t * eps)) / t**3
        for t in t_list
    ]
    return max(ratios) / min(ratios)


def _taylor_trial(rng, tol, bounds, metric):
    k = int(rng.integers(1, bounds[0] + 1))
    m = int(rng.integers(2, bounds[1] + 1))
    r = rng.dirichlet(np.ones(k))
    p = random_model(k, m, rng, normalized=True).entries
    eps = rng.normal(size=(k, m))
    quad = quadratic_form(r, p, eps)
    length = squared_length(MetricParams.fisher(), weighted_model(r, p), weighted_model(r, eps))
    err = _rel(quad, length)
    # same-sign relative perturbations keep the cubic coefficient away from zero
    spread = taylor_sweep_spread(r, p, p * rng.uniform(0.2, 1.0, size=(k, m)))
    problems = []
    if err > tol:
        problems.append(f"quadratic vs squared length rel error {err:.3e}")
    if not spread < TAYLOR_SPREAD:
        problems.append(f"remainder/t^3 spread {spread:.3f}")
    return err, "; ".join(problems) or None


def _geodesic_trial(rng, tol, bounds, metric):
    f = random_morphism_bounded(rng, *bounds)
    M = random_model(f.k, f.m, rng)
    N = random_model(f.k, f.m, rng)
    d0 = geodesic_distance_cone(M, N, 0.5)
    d1 = geodesic_distance_cone(apply_morphism(f, M), apply_morphism(f, N), 0.5)
    err = _rel(d1, d0)
    return err, None if err <= tol else f"{f!r}: d={d0!r} vs {d1!r}"


_TRIALS = {
    "isometry": _isometry_trial,
    "norm": _norm_trial,
    "prop3": _uniformizer_trial,
    "corollary1": _reduction_trial,
    "taylor": _taylor_trial,
    "geodesic": _geodesic_trial,
}


def run_check_suite(
    suite,
    trials=100,
    seed=0,
    tol=None,
    kmax=4,
    mmax=4,
    lmax=12,
    nmax=12,
    metric=None,
    size_cap=DEFAULT_SIZE_CAP,
):
    """Run one named suite and return a :class:`SuiteReport`."""
    if suite not in _TRIALS:
        raise UnknownSuiteError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    tol = DEFAULT_TOL[suite] if tol is None else tol
    bounds = (kmax, mmax, lmax, nmax)
    trial_fn = _TRIALS[suite]
    extra = {"size_cap": size_cap} if suite == "prop3" else {}
    report = SuiteReport(suite, trials, seed, tol)
    for t in range(trials):
        err, failure = trial_fn(trial_rng(seed, t), tol, bounds, metric, **extra)
        report.max_error = max(report.max_error, err)
        if failure:
            report.failures.append({"trial": t, "description": failure, "error": err})
    return report


def integer_matrices(max_total):
    """Every positive integer k x m matrix (m >= 2) with entry sum at most ``max_total``."""
    for total in range(2, max_total + 1):
        for cells in range(2, total + 1):
            for m in range(2, cells + 1):
                if cells % m:
                    continue
                k = cells // m
                # compositions of ``total`` into ``cells`` positive parts
                for cuts in itertools.combinations(range(1, total), cells - 1):
                    parts = np.diff((0, *cuts, total))
                    yield parts.reshape(k, m)
