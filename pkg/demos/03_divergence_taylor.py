"""Demo 03: the conditional I-divergence near the diagonal.

Compares D_r(p, p + t eps) with its quadratic term and with the squared
geodesic distance between the weighted models r p and r q.
"""
import numpy as np

from condgeom import divergence_vs_geodesic, i_divergence, taylor_report

r = np.array([0.3, 0.7])
p = np.array([[0.2, 0.8], [0.6, 0.4]])
eps = np.array([[0.1, -0.1], [-0.2, 0.2]])

print("D_r(p, p + eps) =", i_divergence(r, p, p + eps))
print(f"{'t':>8} {'divergence':>14} {'quadratic':>14} {'gap / t^3':>10}")
for rep in taylor_report(r, p, eps, (1e-1, 1e-2, 1e-3)):
    print(f"{rep.scale:8.0e} {rep.divergence:14.6e} {rep.quadratic:14.6e} "
          f"{rep.abs_error / rep.scale**3:10.4f}")

# The divergence approaches the squared Fisher-choice geodesic distance
for t in (1e-1, 1e-2, 1e-3):
    cmp = divergence_vs_geodesic(r, p, p + t * eps)
    print(f"t={t:.0e}: D / d^2 = {cmp.ratio:.6f}")
