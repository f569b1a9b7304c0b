"""Command line front end: ``condgeom <subcommand> ...``.

Exit status is 0 on success, 1 when a check fails or an input is rejected,
and 2 on usage errors.  JSON output writes floats with 17 significant digits.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import checks
from .divergence import divergence_vs_geodesic, i_divergence, taylor_report
from .errors import GeometryError, NotConvergedError
from .fitting import (
    Dataset,
    FeatureSet,
    empirical,
    exp_loss,
    feature_moments,
    fit_adaboost,
    fit_diagnostics,
    fit_logistic,
    loglik_and_grad,
)
from .metric import (
    geodesic_distance_cone,
    geodesic_distance_normalized,
    gram_matrix,
    inner_product,
    metric_basis,
    parse_metric_spec,
)
from .models import (
    PositiveConditionalModel,
    RationalConditionalModel,
    TangentVector,
    read_matrix_csv,
)
from .morphism import (
    apply_morphism,
    identity_morphism,
    morphism_from_json,
    morphism_to_dict,
    permutation_morphism,
    push_forward,
    rational_uniformizer,
    uniform_replication,
)


def _encode(obj):
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj):
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj)


def _emit(args, payload):
    text = dumps(payload) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)


def _model(path, normalized=False):
    return PositiveConditionalModel(read_matrix_csv(path), normalized=normalized)


def _tangent(path):
    return TangentVector(read_matrix_csv(path))


def _vector(path):
    return read_matrix_csv(path).ravel()


def _index_pair(text):
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'row,col', got {text!r}") from None
    return a, b


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def cmd_check(args):
    metric = parse_metric_spec(args.metric) if args.metric else None
    report = checks.run_check_suite(
        args.suite,
        trials=args.trials,
        seed=args.seed,
        tol=args.tol,
        kmax=args.kmax,
        mmax=args.mmax,
        lmax=args.lmax,
        nmax=args.nmax,
        metric=metric,
        size_cap=args.size_cap,
    )
    _emit(args, report.to_dict())
    return 0 if report.passed else 1


def cmd_metric(args):
    params = parse_metric_spec(args.metric)
    M = _model(args.model)
    out = {"metric": params.spec()}
    if args.gram:
        out["gram"] = gram_matrix(params, M)
    if args.basis:
        ab, cd = args.basis
        out["basis"] = metric_basis(params, M, ab, cd)
    if args.u:
        u = _tangent(args.u)
        v = _tangent(args.v) if args.v else u
        out["inner_product"] = inner_product(params, M, u, v)
    if len(out) == 1:
        raise GeometryError("nothing to compute: pass --gram, --basis or --u")
    _emit(args, out)
    return 0


def cmd_geodesic(args):
    if args.kind == "cone":
        d = geodesic_distance_cone(_model(args.p), _model(args.q), args.c)
    else:
        d = geodesic_distance_normalized(_model(args.p, True), _model(args.q, True), args.c)
    _emit(args, {"kind": args.kind, "c": args.c, "distance": d})
    return 0


def cmd_div(args):
    r = _vector(args.r)
    p, q = read_matrix_csv(args.p), read_matrix_csv(args.q)
    out = {"divergence": i_divergence(r, p, q, nonnegative=args.nonnegative)}
    if args.geodesic:
        out.update(asdict(divergence_vs_geodesic(r, p, q)))
    if args.taylor:
        eps = q - p
        out["taylor"] = [rep.to_dict() for rep in taylor_report(r, p, eps, args.t)]
    _emit(args, out)
    return 0


def cmd_morph(args):
    if args.action == "build":
        if args.kind == "identity":
            f = identity_morphism(args.k, args.m)
        elif args.kind == "permutation":
            if not args.sigma or not args.pi:
                raise GeometryError("permutation needs --sigma and one --pi per row")
            f = permutation_morphism(args.sigma, args.pi)
        elif args.kind == "replication":
            f = uniform_replication(args.k, args.m, args.z, args.w)
        else:
            if not args.numerators:
                raise GeometryError("uniformizer needs --numerators")
            Mr = RationalConditionalModel(read_matrix_csv(args.numerators), args.z)
            f = rational_uniformizer(Mr, args.size_cap)
        _emit(args, morphism_to_dict(f))
        return 0
    f = morphism_from_json(Path(args.morphism).read_text())
    if args.action == "apply":
        _emit(args, {"image": apply_morphism(f, _model(args.model)).entries})
    else:
        _emit(args, {"pushforward": push_forward(f, _tangent(args.tangent)).coeffs})
    return 0


def cmd_fit(args):
    data = Dataset.from_csv(args.data)
    features = FeatureSet.from_json(Path(args.features).read_text())
    if args.kind == "logistic":
        try:
            fit = fit_logistic(data, features, tol=args.tol, max_iter=args.max_iter)
        except NotConvergedError as exc:
            sys.stderr.write(f"condgeom: {exc}\n")
            return 1
        ll, grad = loglik_and_grad(fit.theta, features, data)
        emp, mod = feature_moments(fit.theta, features, data)
        out = {
            "kind": "logistic",
            "theta": fit.theta,
            "loglik": ll,
            "gradient": grad,
            "moments": {"empirical": emp, "model": mod},
            "separable": fit.separable,
            "iterations": fit.iterations,
        }
    else:
        fit = fit_adaboost(data, features, args.rounds, args.alpha_max)
        out = {
            "kind": "boost",
            "theta": fit.theta,
            "exp_loss": exp_loss(fit.theta, features, data),
            "history": fit.history,
            "degenerate_rounds": fit.degenerate_rounds,
        }
    r, p_hat = empirical(data)
    out["empirical"] = {"r": r.weights, "p_hat": p_hat}
    out["diagnostics"] = asdict(fit_diagnostics(data, fit))
    _emit(args, out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="condgeom", description="Conditional information geometry toolkit."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="run a randomized certification suite")
    p.add_argument("--suite", required=True, choices=checks.SUITES)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--metric", default=None, help="metric spec; random when omitted")
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--mmax", type=int, default=4)
    p.add_argument("--lmax", type=int, default=12)
    p.add_argument("--nmax", type=int, default=12)
    p.add_argument("--size-cap", type=int, default=10**6)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("metric", parents=[common], help="evaluate a metric at a model")
    p.add_argument("--metric", default="fisher")
    p.add_argument("--model", required=True)
    p.add_argument("--gram", action="store_true")
    p.add_argument("--basis", nargs=2, type=_index_pair, metavar="ROW,COL")
    p.add_argument("--u")
    p.add_argument("--v")
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("geodesic", parents=[common], help="closed-form geodesic distance")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--kind", choices=("cone", "normalized"), default="cone")
    p.add_argument("--c", type=float, default=0.5, help="c for the cone, lambda for normalized")
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("div", parents=[common], help="conditional I-divergence")
    p.add_argument("--r", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--nonnegative", action="store_true")
    p.add_argument("--geodesic", action="store_true")
    p.add_argument("--taylor", action="store_true")
    p.add_argument("--t", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3, 1e-4])
    p.set_defaults(func=cmd_div)

    p = sub.add_parser("morph", parents=[common], help="build or apply Markov morphisms")
    p.add_argument("action", choices=("build", "apply", "pushforward"))
    p.add_argument("--kind", choices=("identity", "permutation", "replication", "uniformizer"))
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--z", type=int, default=1)
    p.add_argument("--w", type=int, default=1)
    p.add_argument("--sigma", type=_int_list)
    p.add_argument("--pi", type=_int_list, action="append")
    p.add_argument("--numerators", help="CSV of positive integers")
    p.add_argument("--size-cap", type=int, default=10**6)
    p.add_argument("--morphism", help="morphism JSON")
    p.add_argument("--model")
    p.add_argument("--tangent")
    p.set_defaults(func=cmd_morph)

    p = sub.add_parser("fit", parents=[common], help="fit logistic regression or AdaBoost")
    p.add_argument("--kind", choices=("logistic", "boost"), default="logistic")
    p.add_argument("--data", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--rounds", type=int, default=20)
    p.add_argument("--alpha-max", type=float, default=10.0)
    p.set_defaults(func=cmd_fit)
    return parser


def _validate_morph(parser, args):
    if args.command != "morph":
        return
    if args.action == "build" and not args.kind:
        parser.error("morph build needs --kind")
    if args.action != "build" and not args.morphism:
        parser.error(f"morph {args.action} needs --morphism")
    if args.action == "apply" and not args.model:
        parser.error("morph apply needs --model")
    if args.action == "pushforward" and not args.tangent:
        parser.error("morph pushforward needs --tangent")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate_morph(parser, args)
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be at least 1")
    try:
        return args.func(args)
    except (GeometryError, OSError, ValueError) as exc:
        sys.stderr.write(f"condgeom: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
