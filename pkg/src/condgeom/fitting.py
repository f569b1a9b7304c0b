"""Logistic regression and AdaBoost as conditional exponential models.

Both fits minimize the conditional I-divergence to the empirical model under
moment (linear) constraints, the logistic fit over normalized models and the
boosting fit over non-normalized ones.  The diagnostics relate the attained
divergence to the quadratic form and to the squared geodesic distance.

Labels and explanatory values are zero-based indices.  For boosting the
response has two values: index 0 stands for the label +1 and index 1 for -1.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .divergence import i_divergence, quadratic_form, weighted_model
from .errors import (
    BadShapeError,
    EmptyDatasetError,
    ExponentOverflowError,
    GeometryError,
    NotConvergedError,
    ShapeMismatchError,
)
from .metric import geodesic_distance_cone
from .models import EmpiricalDistribution, PositiveConditionalModel

EXPONENT_LIMIT = 700.0
THETA_CAP = 30.0
ALPHA_MAX = 10.0


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observed ``(x, y)`` index pairs over domains of sizes ``k`` and ``m``."""

    observations: np.ndarray
    k: int
    m: int

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=np.int64).reshape(-1, 2)
        if obs.shape[0] == 0:
            raise EmptyDatasetError("dataset has no observations")
        if np.any(obs < 0) or np.any(obs[:, 0] >= self.k) or np.any(obs[:, 1] >= self.m):
            raise BadShapeError(f"observation index outside {self.k} x {self.m}")
        obs.setflags(write=False)
        object.__setattr__(self, "observations", obs)

    def __len__(self):
        return self.observations.shape[0]

    @property
    def x(self):
        return self.observations[:, 0]

    @property
    def y(self):
        return self.observations[:, 1]

    def counts(self):
        c = np.zeros((self.k, self.m))
        np.add.at(c, (self.x, self.y), 1.0)
        return c

    @classmethod
    def from_csv(cls, source, k=None, m=None):
        """Read ``x_index,y_index`` lines; domain sizes default to the observed maxima."""
        if isinstance(source, (str, Path)):
            with open(source, newline="") as fh:
                return cls.from_csv(fh, k, m)
        try:
            rows = [[int(c) for c in r] for r in csv.reader(source) if r]
        except ValueError as exc:
            raise BadShapeError(f"bad dataset line: {exc}") from None
        if not rows:
            raise EmptyDatasetError("dataset file is empty")
        if any(len(r) != 2 for r in rows):
            raise BadShapeError("dataset lines must have exactly two fields")
        obs = np.array(rows)
        k = int(obs[:, 0].max()) + 1 if k is None else k
        m = max(int(obs[:, 1].max()) + 1, 2) if m is None else m
        return cls(obs, k, m)


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """Feature values ``values[f, x, y]``, shape (F, k, m)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 3:
            raise BadShapeError(f"features must be F x k x m, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise BadShapeError("feature values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def F(self):
        return self.values.shape[0]

    def check(self, dataset):
        if self.values.shape[1:] != (dataset.k, dataset.m):
            raise ShapeMismatchError(
                f"features cover {self.values.shape[1:]}, data is {dataset.k} x {dataset.m}"
            )

    def to_json(self):
        return json.dumps({"F": self.F, "values": self.values.tolist()})

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        try:
            fs = cls(obj["values"])
        except (KeyError, TypeError, ValueError):
            raise BadShapeError("features JSON needs a 'values' array") from None
        if "F" in obj and int(obj["F"]) != fs.F:
            raise BadShapeError(f"'F' says {obj['F']} but {fs.F} features were given")
        return fs


def weak_learner_features(h):
    """Binary features from weak-learner outputs ``h[f, x]`` in {-1, +1}."""
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or not np.all(np.abs(h) == 1):
        raise GeometryError("weak learner outputs must be an F x k array of +-1")
    return FeatureSet(np.stack([h, -h], axis=-1))


@dataclass(frozen=True, eq=False)
class FittedModel:
    theta: np.ndarray
    kind: str
    features: FeatureSet
    converged: bool = True
    separable: bool = False
    iterations: int = 0
    degenerate_rounds: tuple = ()
    history: tuple = field(default=())

    def model(self):
        return model_from_theta(self.theta, self.features, self.kind)


def empirical(dataset):
    """Empirical marginal ``r`` and conditional ``p_hat`` (uniform on unseen x)."""
    c = dataset.counts()
    nx = c.sum(axis=1)
    r = EmpiricalDistribution(nx / nx.sum())
    p_hat = np.full_like(c, 1.0 / dataset.m)
    seen = nx > 0
    p_hat[seen] = c[seen] / nx[seen, None]
    return r, p_hat


def _scores(theta, features):
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != features.F:
        raise ShapeMismatchError(f"theta has {theta.size} entries for {features.F} features")
    s = np.tensordot(theta, features.values, axes=1)
    if np.max(np.abs(s)) > EXPONENT_LIMIT:
        raise ExponentOverflowError(
            f"linear predictor reaches {np.max(np.abs(s)):.4g}, beyond {EXPONENT_LIMIT}"
        )
    return s


def _log_softmax(s):
    shift = s.max(axis=1, keepdims=True)
    z = s - shift
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def model_from_theta(theta, features, kind="logistic"):
    """``exp(theta . F(x, y))``, row-normalized for ``logistic``, raw for ``boost``."""
    s = _scores(theta, features)
    if kind == "logistic":
        return PositiveConditionalModel(np.exp(_log_softmax(s)), normalized=True)
    if kind == "boost":
        return PositiveConditionalModel(np.exp(s))
    raise GeometryError(f"unknown model kind {kind!r}")


def loglik_and_grad(theta, features, dataset):
    """Mean log-likelihood and its gradient ``E_hat[f] - sum_x r(x) E_p[f | x]``."""
    features.check(dataset)
    s = _scores(theta, features)
    logp = _log_softmax(s)
    w = dataset.counts() / len(dataset)
    ll = float(np.sum(w * logp))
    r = w.sum(axis=1)
    model_w = r[:, None] * np.exp(logp)
    grad = np.tensordot(features.values, w - model_w, axes=([1, 2], [0, 1]))
    return ll, grad


def feature_moments(theta, features, dataset):
    """Empirical and model expectations of each feature, side by side."""
    features.check(dataset)
    w = dataset.counts() / len(dataset)
    r = w.sum(axis=1)
    p = np.exp(_log_softmax(_scores(theta, features)))
    emp = np.tensordot(features.values, w, axes=([1, 2], [0, 1]))
    mod = np.tensordot(features.values, r[:, None] * p, axes=([1, 2], [0, 1]))
    return emp, mod


def _projected(grad, theta, cap):
    g = grad.copy()
    g[(theta >= cap) & (g > 0)] = 0.0
    g[(theta <= -cap) & (g < 0)] = 0.0
    return g


def _neg_hessian(theta, features, dataset):
    # sum_x r(x) Cov_{p(.|x)}[F], positive semidefinite
    r = dataset.counts().sum(axis=1) / len(dataset)
    p = np.exp(_log_softmax(_scores(theta, features)))
    V = features.values
    mean = np.einsum("fxy,xy->fx", V, p)
    second = np.einsum("fxy,gxy,xy->fgx", V, V, p)
    cov = second - mean[:, None, :] * mean[None, :, :]
    return cov @ r


def _direction(theta, g, features, dataset):
    H = _neg_hessian(theta, features, dataset)
    d = np.linalg.lstsq(H, g, rcond=1e-12)[0]
    if not np.all(np.isfinite(d)) or g @ d <= 1e-14 * (g @ g):
        return g
    return d


def fit_logistic(dataset, features, tol=1e-8, max_iter=500, theta_cap=THETA_CAP):
    """Maximum likelihood by damped Newton ascent with backtracking.

    Stops once every moment constraint holds to ``tol`` (the projected
    gradient's max-norm).  ``theta`` is boxed to ``[-theta_cap, theta_cap]``.
    A fit that passes half the cap is taking the MLE off to infinity; it is
    then pushed on until the box binds or the likelihood stops improving in
    floating point, and flagged ``separable``.
    """
    features.check(dataset)
    theta = np.zeros(features.F)
    ll, g = loglik_and_grad(theta, features, dataset)
    converged = False
    diverging = False
    it = 0
    for it in range(1, max_iter + 1):
        pg = _projected(g, theta, theta_cap)
        diverging = diverging or bool(np.any(np.abs(theta) >= theta_cap / 2))
        if np.max(np.abs(pg), initial=0.0) <= (0.0 if diverging else tol):
            converged = True
            break
        d = _projected(_direction(theta, pg, features, dataset), theta, theta_cap)
        step = 1.0
        while True:
            cand = np.clip(theta + step * d, -theta_cap, theta_cap)
            ll_new, g_new = loglik_and_grad(cand, features, dataset)
            if ll_new >= ll + 1e-4 * g @ (cand - theta) and ll_new >= ll:
                break
            step *= 0.5
            if step < 1e-12:
                break
        if step < 1e-12 or np.array_equal(cand, theta):
            # no further progress in floating point
            converged = diverging or np.max(np.abs(pg)) <= tol
            break
        theta, ll, g = cand, ll_new, g_new
    separable = diverging or bool(np.any(np.abs(theta) >= theta_cap))
    fit = FittedModel(
        theta=theta,
        kind="logistic",
        features=features,
        converged=converged or separable,
        separable=separable,
        iterations=it,
    )
    if not fit.converged:
        raise NotConvergedError(f"no convergence after {it} iterations", fit)
    return fit


def _margins(features, dataset):
    features.check(dataset)
    return features.values[:, dataset.x, dataset.y].T


def exp_loss(theta, features, dataset):
    """``mean_i exp(-theta . F(x_i, y_i))``, evaluated with a max shift."""
    theta = np.asarray(theta, dtype=float)
    z = -(_margins(features, dataset) @ theta)
    shift = z.max()
    with np.errstate(over="ignore"):
        return float(math.exp(shift) * np.mean(np.exp(z - shift))) if shift < 709 else math.inf


def fit_adaboost(dataset, features, rounds, alpha_max=ALPHA_MAX):
    """Coordinate descent on the exponential loss.

    Each round takes the feature with the largest absolute edge under the
    current example weights and moves it by ``1/2 log((1 - err) / err)``,
    the exact line minimizer for +-1 margins.  Steps are clipped to
    ``alpha_max``; rounds where the clip binds are listed in
    ``degenerate_rounds``.  ``history`` holds the loss before round 1 and
    after every round.
    """
    if dataset.m != 2:
        raise GeometryError("AdaBoost needs a binary response (m = 2)")
    U = _margins(features, dataset)
    if not np.all(np.abs(U) == 1):
        raise GeometryError("boosting features must give margins of +-1 on the data")
    theta = np.zeros(features.F)
    history = [exp_loss(theta, features, dataset)]
    degenerate = []
    for rnd in range(1, rounds + 1):
        z = -(U @ theta)
        w = np.exp(z - z.max())
        w /= w.sum()
        edges = w @ U
        f = int(np.argmax(np.abs(edges)))
        err = float(w[U[:, f] < 0].sum())
        if err <= 0.0:
            alpha = alpha_max
        elif err >= 1.0:
            alpha = -alpha_max
        else:
            alpha = 0.5 * math.log((1.0 - err) / err)
        if abs(alpha) >= alpha_max:
            alpha = math.copysign(alpha_max, alpha)
            degenerate.append(rnd)
        theta[f] += alpha
        history.append(exp_loss(theta, features, dataset))
    return FittedModel(
        theta=theta,
        kind="boost",
        features=features,
        iterations=rounds,
        degenerate_rounds=tuple(degenerate),
        history=tuple(history),
    )


@dataclass(frozen=True)
class FitDiagnostics:
    divergence: float
    quadratic: float
    geodesic_half_sq: float
    quadratic_ratio: float
    geodesic_ratio: float
    taylor_regime_violated: bool


def _ratio(a, b):
    if b == 0.0:
        return 1.0 if a == 0.0 else math.inf
    return a / b


def fit_diagnostics(dataset, fitted, regime_tol=0.1):
    """Divergence from the empirical model to the fit, and its two approximations.

    Ratios are approximation / divergence.  The Taylor regime counts as
    violated when either ratio is off from 1 by more than ``regime_tol``.
    """
    r, p_hat = empirical(dataset)
    model = fitted.model().entries
    D = i_divergence(r, p_hat, model, nonnegative=True)
    quad = quadratic_form(r, p_hat, model - p_hat)
    geo = 0.5 * geodesic_distance_cone(weighted_model(r, p_hat), weighted_model(r, model), 1.0) ** 2
    qr, gr = _ratio(quad, D), _ratio(geo, D)
    violated = not (abs(qr - 1.0) <= regime_tol and abs(gr - 1.0) <= regime_tol)
    return FitDiagnostics(D, quad, geo, qr, gr, violated)
