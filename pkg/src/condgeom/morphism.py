"""Congruent embeddings by Markov morphisms.

A morphism ``f`` from k x m models to l x n models is given by a
``B``-stochastic k x l matrix ``R`` and k ``A^(i)``-stochastic m x n matrices
``Q^(i)``, acting as ``f(M) = R.T @ (M (x) Q)`` where row ``i`` of the row
product ``M (x) Q`` is row ``i`` of ``M @ Q^(i)``.

Every column of an ``A``-stochastic matrix carries exactly one nonzero, so an
``A``-stochastic matrix is stored sparsely as its partition plus one weight
per column.  Weights are floats, or :class:`fractions.Fraction` objects for
exact constructions such as :func:`rational_uniformizer`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BadShapeError,
    EmptyBlockError,
    GapError,
    GeometryError,
    NotAPermutationError,
    NotComposableError,
    OverlapError,
    PreconditionViolatedError,
    ShapeMismatchError,
    SizeCapExceededError,
)
from .metric import gram_matrix, inner_product
from .models import (
    CONSTRAINT_TOL,
    PositiveConditionalModel,
    RationalConditionalModel,
    TangentVector,
    as_array,
)

DEFAULT_SIZE_CAP = 10**6


@dataclass(frozen=True)
class Partition:
    """An ordered partition of ``{0, ..., n-1}`` into nonempty blocks."""

    blocks: tuple
    n: int

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(e) for e in b)) for b in self.blocks)
        n = int(self.n)
        seen = set()
        for i, b in enumerate(blocks):
            if not b:
                raise EmptyBlockError(f"block {i} is empty")
            for e in b:
                if not 0 <= e < n:
                    raise GapError(f"element {e} outside the ground set of size {n}")
                if e in seen:
                    raise OverlapError(f"element {e} appears in more than one block")
                seen.add(e)
        if len(seen) != n:
            missing = min(set(range(n)) - seen)
            raise GapError(f"element {missing} is not covered")
        labels = np.empty(n, dtype=np.intp)
        for i, b in enumerate(blocks):
            labels[list(b)] = i
        labels.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_labels", labels)

    def __len__(self):
        return len(self.blocks)

    @property
    def labels(self):
        """``labels[j]`` is the block containing ``j``."""
        return self._labels

    @classmethod
    def from_labels(cls, labels, m=None):
        labels = [int(x) for x in labels]
        m = max(labels) + 1 if m is None else m
        blocks = [[] for _ in range(m)]
        for j, b in enumerate(labels):
            blocks[b].append(j)
        return cls(tuple(blocks), len(labels))


def make_partition(blocks, n):
    return Partition(tuple(tuple(b) for b in blocks), n)


def _contiguous(sizes):
    """Partition into consecutive blocks of the given sizes."""
    labels = np.repeat(np.arange(len(sizes)), sizes)
    return Partition.from_labels(labels, len(sizes))


def _is_exact(weights):
    return weights.dtype == object


class AStochasticMatrix:
    """An m x n stochastic matrix whose row ``i`` is supported exactly on block ``i``.

    Parameters
    ----------
    partition : Partition
        ``m`` blocks over ``{0, ..., n-1}``.
    weights : array_like, shape (n,)
        ``weights[j]`` is the single nonzero of column ``j``.
    validate : bool
        Check positivity and unit row sums.  Disable only for deliberately
        malformed matrices (mutation tests) or trusted exact constructions.
    """

    def __init__(self, partition, weights, *, validate=True):
        w = np.asarray(weights)
        if w.dtype != object:
            w = w.astype(float)
        if w.shape != (partition.n,):
            raise BadShapeError(f"need {partition.n} weights, got shape {w.shape}")
        w = w.copy()
        w.setflags(write=False)
        self.partition = partition
        self.weights = w
        if validate:
            self._validate()

    def _validate(self):
        w = self.weights
        if not all(x > 0 for x in w):
            raise GeometryError("A-stochastic weights must be strictly positive")
        for i, b in enumerate(self.partition.blocks):
            s = sum(w[list(b)])
            ok = s == 1 if _is_exact(w) else abs(float(s) - 1.0) <= CONSTRAINT_TOL
            if not ok:
                raise GeometryError(f"row {i} sums to {s}, expected 1")

    @classmethod
    def from_dense(cls, entries, partition):
        """Validating constructor from a dense matrix."""
        a = np.asarray(entries)
        if a.dtype != object:
            a = a.astype(float)
        if not is_a_stochastic(a, partition):
            raise GeometryError("matrix is not stochastic with respect to the partition")
        lab = partition.labels
        return cls(partition, a[lab, np.arange(partition.n)])

    @property
    def owner(self):
        return self.partition.labels

    @property
    def shape(self):
        return (len(self.partition), self.partition.n)

    @property
    def exact(self):
        return _is_exact(self.weights)

    @property
    def entries(self):
        m, n = self.shape
        zero = Fraction(0) if self.exact else 0.0
        out = np.full((m, n), zero, dtype=object if self.exact else float)
        out[self.owner, np.arange(n)] = self.weights
        return out

    def is_permutation(self):
        m, n = self.shape
        return m == n and all(x == 1 for x in self.weights)

    def to_float(self):
        return AStochasticMatrix(
            self.partition, np.array([float(x) for x in self.weights]), validate=False
        )

    def __repr__(self):
        return f"AStochasticMatrix(shape={self.shape}, blocks={self.partition.blocks})"


def is_a_stochastic(Q, partition, tol=CONSTRAINT_TOL):
    """True iff ``Q``'s row supports are exactly the blocks and rows sum to one."""
    a = np.asarray(Q)
    if a.shape != (len(partition), partition.n):
        return False
    exact = a.dtype == object
    for i, b in enumerate(partition.blocks):
        row = a[i]
        inside = np.zeros(partition.n, dtype=bool)
        inside[list(b)] = True
        if not all(x > 0 for x in row[inside]) or any(x != 0 for x in row[~inside]):
            return False
        s = sum(row[inside])
        if (s != 1) if exact else abs(float(s) - 1.0) > tol:
            return False
    return True


def is_uniform_a_stochastic(Q, partition, tol=CONSTRAINT_TOL):
    """``A``-stochastic with equal support sizes and identical positive entries."""
    if not is_a_stochastic(Q, partition, tol):
        return False
    sizes = {len(b) for b in partition.blocks}
    if len(sizes) != 1:
        return False
    a = np.asarray(Q)
    vals = a[partition.labels, np.arange(partition.n)]
    if a.dtype == object:
        return len(set(vals)) == 1
    return bool(np.ptp(vals.astype(float)) <= tol)


@dataclass(frozen=True, eq=False)
class MarkovMorphism:
    """``f(M) = R.T @ (M (x) Q)`` from k x m models to l x n models."""

    R: AStochasticMatrix
    Q: tuple

    def __post_init__(self):
        Q = tuple(self.Q)
        k, l = self.R.shape
        if len(Q) != k:
            raise ShapeMismatchError(f"R has {k} rows but {len(Q)} Q matrices were given")
        shapes = {q.shape for q in Q}
        if len(shapes) != 1:
            raise ShapeMismatchError(f"Q matrices disagree in shape: {sorted(shapes)}")
        object.__setattr__(self, "Q", Q)
        exact = self.R.exact or any(q.exact for q in Q)
        dtype = object if exact else float
        object.__setattr__(self, "_qown", np.stack([q.owner for q in Q]))
        object.__setattr__(self, "_qw", np.stack([q.weights.astype(dtype) for q in Q]))

    @property
    def k(self):
        return self.R.shape[0]

    @property
    def l(self):  # noqa: E743
        return self.R.shape[1]

    @property
    def m(self):
        return self.Q[0].shape[0]

    @property
    def n(self):
        return self.Q[0].shape[1]

    @property
    def source_shape(self):
        return (self.k, self.m)

    @property
    def target_shape(self):
        return (self.l, self.n)

    @property
    def exact(self):
        return self.R.exact or any(q.exact for q in self.Q)

    def __call__(self, M):
        return apply_morphism(self, M)

    def to_float(self):
        return MarkovMorphism(self.R.to_float(), tuple(q.to_float() for q in self.Q))

    def __repr__(self):
        return f"MarkovMorphism({self.k}x{self.m} -> {self.l}x{self.n})"


def to_float(f):
    return f.to_float()


def _linear_image(f, x):
    # out[i, j] = R[a, i] * Q^(a)[b, j] * x[a, b] with a, b the unique owners
    if x.shape != f.source_shape:
        raise ShapeMismatchError(f"expected a {f.source_shape} matrix, got {x.shape}")
    if f.exact and x.dtype != object:
        f = f.to_float()
    a = f.R.owner
    qown = f._qown[a]
    return f.R.weights[:, None] * f._qw[a] * x[a[:, None], qown]


def _source_array(M):
    if isinstance(M, (PositiveConditionalModel, TangentVector)):
        return as_array(M)
    a = np.asarray(M)
    return a if a.dtype == object else a.astype(float)


def row_product(M, Q):
    """``[M (x) Q]_i = [M @ Q^(i)]_i`` for dense matrices."""
    x = _source_array(M)
    Q = [q.entries if isinstance(q, AStochasticMatrix) else np.asarray(q) for q in Q]
    if x.ndim != 2 or len(Q) != x.shape[0] or any(q.shape[0] != x.shape[1] for q in Q):
        raise ShapeMismatchError("row product needs one m x n matrix per row of M")
    if len({q.shape for q in Q}) != 1:
        raise ShapeMismatchError("Q matrices disagree in shape")
    return np.array([x[i] @ Q[i] for i in range(x.shape[0])])


def apply_morphism(f, M):
    """Image ``f(M)``.

    A :class:`PositiveConditionalModel` maps to a model (flagged normalized only
    when ``M`` is normalized and ``R`` is a permutation); plain arrays map to
    arrays, keeping ``Fraction`` entries exact.
    """
    out = _linear_image(f, _source_array(M))
    if isinstance(M, PositiveConditionalModel):
        return PositiveConditionalModel(
            out, normalized=M.normalized and f.R.is_permutation()
        )
    return out


def apply_morphism_rational(f, M):
    """Exact image of a rational model as reduced ``(numerators, denominators)``.

    Requires ``f`` to carry exact weights.  All arithmetic is on integers.
    """
    if not isinstance(M, RationalConditionalModel):
        raise TypeError("apply_morphism_rational needs a RationalConditionalModel")
    if M.shape != f.source_shape:
        raise ShapeMismatchError(f"expected a {f.source_shape} model, got {M.shape}")
    if not f.exact:
        raise GeometryError("morphism weights are not exact")

    def split(w):
        fr = [Fraction(x) for x in w.ravel()]
        num = np.array([x.numerator for x in fr], dtype=object).reshape(w.shape)
        den = np.array([x.denominator for x in fr], dtype=object).reshape(w.shape)
        return num, den

    rn, rd = split(f.R.weights)
    qn, qd = split(f._qw)
    bound = max(rd) * max(qd.ravel()) * M.denominator * max(max(rn), max(qn.ravel())) ** 2
    bound *= int(M.numerators.max())
    dtype = np.int64 if bound < 2**62 else object
    rn, rd, qn, qd = (x.astype(dtype) for x in (rn, rd, qn, qd))
    a = f.R.owner
    mnum = M.numerators.astype(dtype)[a[:, None], f._qown[a]]
    num = rn[:, None] * qn[a] * mnum
    den = rd[:, None] * qd[a] * M.denominator
    g = np.gcd(num, den) if dtype is np.int64 else np.frompyfunc(math.gcd, 2, 1)(num, den)
    return num // g, den // g


def push_forward(f, v):
    """Push a tangent vector at ``M`` forward to ``f(M)``; ``f`` is linear so ``f_* = f``."""
    out = _linear_image(f, _source_array(v))
    if isinstance(v, TangentVector):
        # row i of the image sums to R[a, i] * (row a of v)
        return TangentVector(out, normalized_context=v.normalized_context)
    return out


def pushed_basis(f):
    """Array ``P`` of shape (k, m, l, n) with ``P[a, b] = f_*(d_ab)``."""
    R = f.R.entries.astype(float)
    Q = np.stack([q.entries.astype(float) for q in f.Q])
    return np.einsum("ai,abj->abij", R, Q)


def _basis(shape, ab):
    e = np.zeros(shape)
    e[ab] = 1.0
    return e


def pull_back_metric(f, params, M, ab, cd):
    """``(f^* g)_M(d_ab, d_cd) = g_{f(M)}(f_* d_ab, f_* d_cd)``."""
    x = as_array(M)
    F = _linear_image(f, x)
    shape = f.source_shape
    u = _linear_image(f, _basis(shape, tuple(ab)))
    v = _linear_image(f, _basis(shape, tuple(cd)))
    return inner_product(params, F, u, v)


def pull_back_gram(f, params, M):
    """All pulled-back basis inner products as a km x km matrix.

    Works on the pushed basis directly, so the l*n x l*n target Gram matrix is
    never formed.
    """
    f = f.to_float() if f.exact else f
    x = as_array(M)
    F = _linear_image(f, x)
    total = F.sum()
    rows = F.sum(axis=1)
    A, B, C = params.at(float(total))
    k, m = f.source_shape
    P = pushed_basis(f).reshape(k * m, f.l, f.n)
    S = P.sum(axis=(1, 2))
    RS = P.sum(axis=2)
    flat = P.reshape(k * m, -1)
    G = A * np.outer(S, S)
    G += B * total * (RS / rows) @ RS.T
    G += C * total * (flat / F.ravel()) @ flat.T
    return G


@dataclass(frozen=True)
class IsometryReport:
    max_abs_error: float
    max_rel_error: float
    worst_pair: tuple
    passed: bool


def check_isometry(f, params, M, tol=1e-9):
    """Compare the source metric with its pull-back through ``f`` on every basis pair.

    A pair passes when ``|g - f^* g| <= tol * (1 + |g|)``.
    """
    x = as_array(M)
    k, m = x.shape
    G = gram_matrix(params, x)
    H = pull_back_gram(f, params, x)
    err = np.abs(G - H)
    scaled = err / (1.0 + np.abs(G))
    p, q = np.unravel_index(np.argmax(scaled), err.shape)
    worst = (divmod(int(p), m), divmod(int(q), m))
    return IsometryReport(
        max_abs_error=float(err.max()),
        max_rel_error=float(scaled.max()),
        worst_pair=worst,
        passed=bool(np.all(err <= tol * (1.0 + np.abs(G)))),
    )


def _check_permutation(p, size, what):
    p = [int(x) for x in p]
    if sorted(p) != list(range(size)):
        raise NotAPermutationError(f"{what} {p} is not a permutation of 0..{size - 1}")
    return p


def _permutation_matrix(p):
    # row a carries its single 1 in column p[a]
    return AStochasticMatrix(
        Partition.from_labels(np.argsort(p), len(p)), np.ones(len(p))
    )


def permutation_morphism(sigma, Pi):
    """Morphism sending ``d_ab`` to ``d_{sigma[a], Pi[a][b]}``."""
    k = len(sigma)
    sigma = _check_permutation(sigma, k, "sigma")
    if len(Pi) != k:
        raise NotAPermutationError(f"need {k} row permutations, got {len(Pi)}")
    m = len(Pi[0])
    Pi = [_check_permutation(p, m, f"pi[{a}]") for a, p in enumerate(Pi)]
    return MarkovMorphism(_permutation_matrix(sigma), tuple(_permutation_matrix(p) for p in Pi))


def identity_morphism(k, m):
    return permutation_morphism(list(range(k)), [list(range(m))] * k)


def _extend(forced, size):
    """Complete a partial injective map to a permutation, pairing leftovers in order."""
    perm = [None] * size
    for s, t in forced.items():
        perm[s] = t
    free = iter(sorted(set(range(size)) - set(forced.values())))
    for s in range(size):
        if perm[s] is None:
            perm[s] = next(free)
    return perm


def solve_basis_transport(a1, b1, c1, d1, a2, b2, c2, d2, k, m):
    """A permutation morphism with ``d_{a1 b1} -> d_{a2 b2}`` and ``d_{c1 d1} -> d_{c2 d2}``."""
    if a1 == c1 or a2 == c2:
        raise PreconditionViolatedError("need a1 != c1 and a2 != c2")
    for a in (a1, c1, a2, c2):
        if not 0 <= a < k:
            raise PreconditionViolatedError(f"row index {a} outside 0..{k - 1}")
    for b in (b1, d1, b2, d2):
        if not 0 <= b < m:
            raise PreconditionViolatedError(f"column index {b} outside 0..{m - 1}")
    sigma = _extend({a1: a2, c1: c2}, k)
    Pi = [_extend({}, m) for _ in range(k)]
    Pi[a1] = _extend({b1: b2}, m)
    Pi[c1] = _extend({d1: d2}, m)
    return permutation_morphism(sigma, Pi)


def _uniform_blocks(count, width):
    return AStochasticMatrix(
        _contiguous([width] * count), np.full(count * width, 1.0 / width), validate=False
    )


def uniform_replication(k, m, z, w):
    """Uniform morphism from k x m to kz x mw models.

    Row ``i`` of ``R`` spreads evenly over columns ``i*z .. i*z + z - 1`` and
    row ``j`` of every ``Q^(i)`` over ``j*w .. j*w + w - 1``.
    """
    if z < 1 or w < 1:
        raise GeometryError("z and w must be positive integers")
    q = _uniform_blocks(m, w)
    return MarkovMorphism(_uniform_blocks(k, z), (q,) * k)


def rational_uniformizer(M, size_cap=DEFAULT_SIZE_CAP):
    """Exact morphism mapping the rational model ``M`` to a constant matrix.

    With row totals ``T_i = |M~_i|`` and ``P = prod_i T_i``, row ``j`` of
    ``Q^(i)`` has ``M~_ij * P / T_i`` nonzeros of equal weight and row ``i``
    of ``R`` has ``T_i`` nonzeros of weight ``1 / T_i``, each laid out as
    consecutive column blocks.  The image of ``M`` has shape ``|M~| x P`` and
    every entry equals ``1 / (z P)``.
    """
    nums = M.numerators
    totals = M.row_totals()
    rows = sum(totals)
    cols = math.prod(totals)
    if rows * cols > size_cap:
        raise SizeCapExceededError(rows, cols, size_cap)
    R = AStochasticMatrix(
        _contiguous(totals),
        np.array([Fraction(1, t) for t in totals for _ in range(t)], dtype=object),
        validate=False,
    )
    Q = []
    for i, t in enumerate(totals):
        rest = cols // t
        sizes = [int(v) * rest for v in nums[i]]
        weights = np.empty(cols, dtype=object)
        start = 0
        for s in sizes:
            weights[start:start + s] = Fraction(1, s)
            start += s
        Q.append(AStochasticMatrix(_contiguous(sizes), weights, validate=False))
    return MarkovMorphism(R, tuple(Q))


def compose(f, g):
    """The morphism ``g o f``.

    ``g o f`` lies in the same class only when ``g`` uses the same ``Q`` for
    all target rows of ``f`` that come from one source row; otherwise
    :class:`NotComposableError` is raised.
    """
    if f.target_shape != g.source_shape:
        raise ShapeMismatchError(f"cannot chain {f.target_shape} into {g.source_shape}")
    r1, r2 = f.R, g.R
    R = AStochasticMatrix(
        Partition.from_labels(r1.owner[r2.owner], r1.shape[0]),
        r1.weights[r2.owner] * r2.weights,
        validate=False,
    )
    Q = []
    for a, block in enumerate(r1.partition.blocks):
        q2 = g.Q[block[0]]
        for i in block[1:]:
            other = g.Q[i]
            if other.partition != q2.partition or not np.array_equal(other.weights, q2.weights):
                raise NotComposableError(
                    f"rows {block[0]} and {i} of the intermediate space use different Q"
                )
        q1 = f.Q[a]
        Q.append(
            AStochasticMatrix(
                Partition.from_labels(q1.owner[q2.owner], q1.shape[0]),
                q1.weights[q2.owner] * q2.weights,
                validate=False,
            )
        )
    return MarkovMorphism(R, tuple(Q))


def _fmt_entry(x):
    if isinstance(x, Fraction):
        return str(x)
    if x == 0:
        return "0"
    return repr(float(x))


def _matrix_to_json(q):
    return {
        "entries": [[_fmt_entry(x) for x in row] for row in q.entries],
        "blocks": [list(b) for b in q.partition.blocks],
    }


def morphism_to_dict(f):
    return {"R": _matrix_to_json(f.R), "Q": [_matrix_to_json(q) for q in f.Q]}


def morphism_to_json(f, **kwargs):
    """Serialize with entries as decimal or ``"p/q"`` strings."""
    return json.dumps(morphism_to_dict(f), **kwargs)


def _matrix_from_json(obj, exact):
    try:
        entries = [[Fraction(str(x)) for x in row] for row in obj["entries"]]
        blocks = obj["blocks"]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise GeometryError(f"malformed stochastic matrix: {exc}") from None
    widths = {len(r) for r in entries}
    if len(widths) != 1:
        raise BadShapeError("ragged entries")
    partition = make_partition(blocks, widths.pop())
    a = np.array(entries, dtype=object)
    if not exact:
        a = a.astype(float)
    return AStochasticMatrix.from_dense(a, partition)


def morphism_from_dict(obj, exact=False):
    try:
        R, Qs = obj["R"], obj["Q"]
    except (KeyError, TypeError):
        raise GeometryError("morphism JSON needs 'R' and 'Q'") from None
    return MarkovMorphism(
        _matrix_from_json(R, exact), tuple(_matrix_from_json(q, exact) for q in Qs)
    )


def morphism_from_json(text, exact=False):
    """Parse the JSON format written by :func:`morphism_to_json`.

    With ``exact=True`` the weights stay :class:`fractions.Fraction`.
    """
    return morphism_from_dict(json.loads(text), exact=exact)
