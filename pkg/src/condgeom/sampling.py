"""Random models, tangents, metrics and morphisms for property suites.

Every function takes a :class:`numpy.random.Generator`; suites derive one per
trial from ``(seed, trial)`` so results do not depend on evaluation order.
"""
from __future__ import annotations

import numpy as np

from .metric import MetricParams, constant, power, reciprocal
from .models import PositiveConditionalModel, TangentVector
from .morphism import AStochasticMatrix, MarkovMorphism, Partition


def trial_rng(seed, trial):
    return np.random.default_rng([int(seed), int(trial)])


def random_partition(n, m, rng, max_tries=10_000):
    """Uniform ordered partition of ``range(n)`` into ``m`` nonempty blocks."""
    if not 0 < m <= n:
        raise ValueError(f"need 0 < m <= n, got m={m}, n={n}")
    for _ in range(max_tries):
        labels = rng.integers(0, m, size=n)
        if np.unique(labels).size == m:
            return Partition.from_labels(labels, m)
    # surjection is rare for m close to n; fall back to a shuffled cover
    labels = np.concatenate([np.arange(m), rng.integers(0, m, size=n - m)])
    return Partition.from_labels(rng.permutation(labels), m)


def random_a_stochastic(m, n, rng, alpha=1.0):
    """Random partition with symmetric-Dirichlet weights on each block."""
    part = random_partition(n, m, rng)
    w = np.empty(n)
    for b in part.blocks:
        w[list(b)] = rng.dirichlet(np.full(len(b), alpha))
    # Dirichlet draws can underflow to exactly 0 for tiny alpha
    w = np.maximum(w, 1e-300)
    return AStochasticMatrix(part, w, validate=False)


def random_morphism(k, m, l, n, rng, alpha=1.0):  # noqa: E741
    R = random_a_stochastic(k, l, rng, alpha)
    Q = tuple(random_a_stochastic(m, n, rng, alpha) for _ in range(k))
    return MarkovMorphism(R, Q)


def random_morphism_bounded(rng, kmax=4, mmax=4, lmax=12, nmax=12):
    k = int(rng.integers(1, kmax + 1))
    m = int(rng.integers(2, mmax + 1))
    l = int(rng.integers(k, max(k, lmax) + 1))  # noqa: E741
    n = int(rng.integers(m, max(m, nmax) + 1))
    return random_morphism(k, m, l, n, rng)


def random_model(k, m, rng, normalized=False, low=0.05, high=3.0):
    x = rng.uniform(low, high, size=(k, m))
    if normalized:
        x /= x.sum(axis=1, keepdims=True)
    return PositiveConditionalModel(x, normalized=normalized)


def random_zero_row_tangent(k, m, rng):
    u = rng.normal(size=(k, m))
    return TangentVector(u - u.mean(axis=1, keepdims=True), normalized_context=True)


def random_scalar_field(rng, positive=False):
    kind = rng.integers(3)
    c = rng.uniform(0.1, 2.0) if positive else rng.uniform(-2.0, 2.0)
    if kind == 0:
        return constant(c)
    if kind == 1:
        return reciprocal(c)
    return power(c, rng.uniform(-2.0, 2.0))


def random_metric_params(rng):
    return MetricParams(
        random_scalar_field(rng), random_scalar_field(rng), random_scalar_field(rng, positive=True)
    )
