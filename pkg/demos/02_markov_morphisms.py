"""Demo 02: congruent embeddings by Markov morphisms.

Builds the three special transformations, applies them, and certifies
that a random morphism is an isometry for a random metric in the family.
"""
import numpy as np

from condgeom import (
    RationalConditionalModel,
    apply_morphism,
    apply_morphism_rational,
    check_isometry,
    l1_norm,
    permutation_morphism,
    rational_uniformizer,
    uniform_replication,
)
from condgeom.sampling import random_metric_params, random_model, random_morphism

rng = np.random.default_rng(7)
M = random_model(2, 3, rng)
print("M =\n", np.round(M.entries, 3))

# Permutations relabel rows and, within each row, columns
h = permutation_morphism([1, 0], [[2, 0, 1], [0, 1, 2]])
print("permuted =\n", np.round(apply_morphism(h, M).entries, 3))

# Replication spreads each entry uniformly; the norm is kept
r = uniform_replication(2, 3, 2, 2)
image = apply_morphism(r, M)
print("replicated shape:", image.shape, "norms:", l1_norm(M), l1_norm(image))

# A rational model is sent to a constant matrix, exactly
Mr = RationalConditionalModel([[1, 2], [2, 2]], 7)
num, den = apply_morphism_rational(rational_uniformizer(Mr), Mr)
print("uniformized shape:", num.shape, "entries:", {f"{a}/{b}" for a, b in zip(num.ravel(), den.ravel())})

# Isometry certificate for a random morphism and metric
f = random_morphism(2, 3, 5, 7, rng)
params = random_metric_params(rng)
rep = check_isometry(f, params, M)
print(f"metric {params.spec()}")
print(f"pull-back vs metric: max rel error {rep.max_rel_error:.2e}, passed {rep.passed}")
