"""Conditional information geometry.

Invariant metrics on positive conditional models, congruent embeddings by
Markov morphisms, and the conditional I-divergence behind logistic
regression and AdaBoost.
"""
from .divergence import (
    DivergenceReport,
    divergence_vs_geodesic,
    i_divergence,
    quadratic_form,
    taylor_report,
    weighted_model,
)
from .metric import (
    MetricParams,
    ScalarField,
    constant,
    eval_scalar,
    fisher_inner_product,
    geodesic_distance_cone,
    geodesic_distance_normalized,
    gram_matrix,
    inner_product,
    metric_basis,
    parse_metric_spec,
    power,
    reciprocal,
    squared_length,
)
from .models import (
    EmpiricalDistribution,
    PositiveConditionalModel,
    RationalConditionalModel,
    TangentVector,
    l1_norm,
    make_positive_model,
    make_tangent,
    normalize_rows,
    project_to_tangent,
    rationalize,
    row_l1_norm,
)
from .morphism import (
    AStochasticMatrix,
    MarkovMorphism,
    Partition,
    apply_morphism,
    apply_morphism_rational,
    check_isometry,
    compose,
    identity_morphism,
    is_a_stochastic,
    is_uniform_a_stochastic,
    make_partition,
    permutation_morphism,
    pull_back_gram,
    pull_back_metric,
    push_forward,
    rational_uniformizer,
    row_product,
    solve_basis_transport,
    uniform_replication,
)
from .fitting import (
    Dataset,
    FeatureSet,
    FittedModel,
    empirical,
    exp_loss,
    fit_adaboost,
    fit_diagnostics,
    fit_logistic,
    loglik_and_grad,
    model_from_theta,
    weak_learner_features,
)
from .checks import SuiteReport, run_check_suite

__version__ = "0.1.0"
