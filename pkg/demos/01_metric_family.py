"""Demo 01: the invariant metric family on positive conditional models.

Evaluates the metric on basis vectors and tangent vectors, builds the full
Gram matrix, and shows that on normalized models only C matters.
"""
import numpy as np

from condgeom import (
    MetricParams,
    constant,
    fisher_inner_product,
    geodesic_distance_cone,
    geodesic_distance_normalized,
    gram_matrix,
    inner_product,
    metric_basis,
    parse_metric_spec,
    reciprocal,
)

M = np.array([[1.0, 2.0], [3.0, 4.0]])
params = parse_metric_spec("abc:A=const:1;B=const:2;C=const:3")
print("metric:", params.spec())
print("g_M(d_01, d_01) =", metric_basis(params, M, (0, 1), (0, 1)))
print("Gram matrix at M:")
print(np.round(gram_matrix(params, M), 4))

# On normalized models with zero-row-sum tangents A and B drop out
p = np.array([[0.2, 0.8], [0.6, 0.4]])
u = np.array([[1.0, -1.0], [0.5, -0.5]])
C = reciprocal(0.5)
for A, B in [(0.0, 0.0), (5.0, -1.0), (-3.0, 7.0)]:
    g = MetricParams(constant(A), constant(B), C)
    print(f"A={A:+.0f} B={B:+.0f}: <u, u> = {inner_product(g, p, u, u):.12f}")
print("scaled product Fisher:", fisher_inner_product(p, u, u, 2 * C(2)))

# Closed-form geodesic distances
q = np.array([[0.3, 0.7], [0.5, 0.5]])
print("cone distance (c = 1/2):", geodesic_distance_cone(p, q, 0.5))
print("normalized distance (lambda = 1):", geodesic_distance_normalized(p, q, 1.0))
