"""Independent reference computations used only by the tests.

Nothing here calls the closed-form or sparse routines it is compared with.
"""
import itertools

import numpy as np

from condgeom.metric import metric_basis


def dense_apply(f, M):
    """``R.T @ (M (x) Q)`` with plain dense matrix products."""
    M = np.asarray(M, dtype=float)
    R = f.R.entries.astype(float)
    rows = [M[i] @ f.Q[i].entries.astype(float) for i in range(M.shape[0])]
    return R.T @ np.array(rows)


def term_count(f, M):
    """For each entry of f(M), the number of nonzero terms in the double sum."""
    M = np.asarray(M, dtype=float)
    R = f.R.entries.astype(float)
    Q = [q.entries.astype(float) for q in f.Q]
    k, m = M.shape
    counts = np.zeros((f.l, f.n), dtype=int)
    for i, j in itertools.product(range(f.l), range(f.n)):
        counts[i, j] = sum(
            1 for s in range(k) for t in range(m) if R[s, i] * Q[s][t, j] * M[s, t] != 0
        )
    return counts


def pull_back_naive(f, params, M, ab, cd):
    """The quadruple sum over target basis pairs, one metric_basis call per term."""
    F = dense_apply(f, M)
    R = f.R.entries.astype(float)
    (a, b), (c, d) = ab, cd
    Qa = f.Q[a].entries.astype(float)
    Qc = f.Q[c].entries.astype(float)
    total = 0.0
    for i, j, s, t in itertools.product(range(f.l), range(f.n), range(f.l), range(f.n)):
        coef = R[a, i] * R[c, s] * Qa[b, j] * Qc[d, t]
        if coef:
            total += coef * metric_basis(params, F, (i, j), (s, t))
    return total


def double_sum_inner(params, M, u, v):
    """Bilinear expansion over every pair of basis vectors."""
    M, u, v = (np.asarray(x, dtype=float) for x in (M, u, v))
    k, m = M.shape
    idx = list(itertools.product(range(k), range(m)))
    return sum(u[ab] * v[cd] * metric_basis(params, M, ab, cd) for ab in idx for cd in idx)


def central_difference(fn, theta, h=1e-5):
    theta = np.asarray(theta, dtype=float)
    g = np.zeros_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (fn(theta + e) - fn(theta - e)) / (2 * h)
    return g


def softmax_rows(s):
    e = np.exp(s - s.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def divergence_direct(r, p, q):
    """Textbook formula, no stabilization, positive inputs only."""
    r, p, q = (np.asarray(x, dtype=float) for x in (r, p, q))
    return float(np.sum(r[:, None] * (p * np.log(p / q) - p + q)))
