"""Command-line front end.

Subcommands: convert, killing, conformal, equiv, rosen-equiv, family, verify.
Reports are JSON (stdout or --out) and embed the tolerances, grid density and
seed used, so identical inputs and seed give byte-identical output. Exit codes:
0 success, 2 inconclusive equivalence, 1 error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .errors import InconclusiveError, PlaneWaveError
from .forms import (alekseevsky_to_brinkmann, brinkmann_to_alekseevsky,
                    brinkmannize, pullback_residual, rosenize, _sample_points)
from .metrics import (AlekseevskyMetric, BrinkmannMetric, RosenMetric,
                      is_conformally_curved, is_flat, is_vacuum)
from .ode import SolverConfig
from .equivalence import brinkmann_isometry, rosen_isomorphic
from .sequences import bernoulli_shift, hilbert_distance, shift_equivalent
from .serialization import (dump_json, field_from_json, load_json,
                            metric_from_json, metric_to_json,
                            point_map_from_json, sequence_from_json,
                            validate)
from .shift_family import family_isometry_crosscheck, family_metric
from .symmetries import (commutant_automorphisms, conformal_algebra,
                         extra_isometry, killing_residual)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2


def _common(parser):
    parser.add_argument("--tol", type=float, default=1e-7,
                        help="residual tolerance recorded in the report")
    parser.add_argument("--grid", type=int, default=257,
                        help="sample grid density for detectors")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed")
    parser.add_argument("--out", help="write the JSON report here (default stdout)")
    parser.add_argument("--csv", help="prefix for plot-ready CSV of sampled curves")


def _emit(report, args):
    report["params"] = {"tol": args.tol, "grid": args.grid, "seed": args.seed,
                        "version": __version__}
    text = dump_json(report, args.out)
    if args.out is None:
        print(text)


def _load_metric(path):
    data = load_json(path)
    validate(data, "metric")
    return metric_from_json(data)


def _csv_profile(prefix, name, profile, num=501):
    us = profile.sample_grid(num)
    vals = profile.eval_array(us, 0).reshape(len(us), -1)
    header = "u," + ",".join(f"m{i}{j}" for i in range(profile.n)
                             for j in range(profile.n))
    np.savetxt(f"{prefix}_{name}.csv", np.column_stack([us, vals]),
               delimiter=",", header=header, comments="")


def _cmd_convert(args):
    metric = _load_metric(args.input)
    report = {"command": "convert", "input_form": metric.form, "to": args.to}
    if args.to == "brinkmann":
        if isinstance(metric, RosenMetric):
            res = brinkmannize(metric, u0=args.u0)
        elif isinstance(metric, AlekseevskyMetric):
            res = alekseevsky_to_brinkmann(metric)
        else:
            raise PlaneWaveError("input is already in Brinkmann form")
        report["metric"] = metric_to_json(res.metric)
        report["pullback_residual"] = res.residual
        if args.csv:
            _csv_profile(args.csv, "p", res.metric.p)
    elif args.to == "rosen":
        if not isinstance(metric, BrinkmannMetric):
            raise PlaneWaveError("rosen conversion expects Brinkmann input")
        u0 = args.u0 if args.u0 is not None else 0.0
        res = rosenize(metric, u0)
        pts = _sample_points(res.metric, 25, seed=args.seed,
                             u_window=(res.validity.lo, res.validity.hi))
        resid = pullback_residual(res.point_map.inverse, res.metric, metric, pts)
        report["metric"] = metric_to_json(res.metric)
        report["validity"] = [res.validity.lo, res.validity.hi]
        report["pullback_residual"] = resid
        if args.csv:
            _csv_profile(args.csv, "h", res.metric.h)
    elif args.to == "alekseevsky":
        if not isinstance(metric, BrinkmannMetric):
            raise PlaneWaveError("alekseevsky conversion expects Brinkmann input")
        res = brinkmann_to_alekseevsky(metric)
        report["metric"] = metric_to_json(res.metric)
        report["pullback_residual"] = res.residual
    _emit(report, args)
    return EXIT_OK


def _cmd_killing(args):
    metric = _load_metric(args.metric)
    if not isinstance(metric, BrinkmannMetric):
        raise PlaneWaveError("killing analysis expects a Brinkmann metric")
    extra = extra_isometry(metric)
    comm = commutant_automorphisms(metric)
    report = {
        "command": "killing",
        "flat": is_flat(metric),
        "vacuum": is_vacuum(metric),
        "commutant_dimension": len(comm),
        "commutant_basis": [w.tolist() for w in comm],
        "extra_automorphism": None if extra.witness is None else {
            "a": extra.witness[0], "b": extra.witness[1],
            "C": extra.witness[2].tolist()},
        "degenerate_flat": extra.degenerate_flat,
        "nullspace_dim": extra.nullspace_dim,
    }
    if extra.field is not None:
        report["killing_residual"] = killing_residual(metric, extra.field, S=0.0,
                                                      num=args.grid, seed=args.seed)
    _emit(report, args)
    return EXIT_OK


def _cmd_conformal(args):
    metric = _load_metric(args.metric)
    if not isinstance(metric, BrinkmannMetric):
        raise PlaneWaveError("conformal analysis expects a Brinkmann metric")
    rep = conformal_algebra(metric)
    out = rep.summary()
    out.update({
        "command": "conformal",
        "labels": rep.labels,
        "structure_constants": rep.structure_constants.round(12).tolist(),
        "conformally_curved": True,
    })
    if rep.has_extra_symmetry:
        out["extra_W"] = rep.extra_W.tolist()
        out["extra_w_at_base"] = rep.extra_w(rep.base_point, 0)
    _emit(out, args)
    return EXIT_OK


def _cmd_equiv(args):
    m1, m2 = _load_metric(args.metrics[0]), _load_metric(args.metrics[1])
    report = {"command": "equiv"}
    try:
        wit = brinkmann_isometry(m1, m2, tol=args.tol if args.tol < 1e-3 else 1e-6)
    except InconclusiveError as exc:
        report.update({"verdict": "inconclusive", "reason": str(exc)})
        _emit(report, args)
        return EXIT_INCONCLUSIVE
    if wit is None:
        report["verdict"] = "not_isometric"
    else:
        report.update({"verdict": "isometric", "witness": wit.to_json()})
    _emit(report, args)
    return EXIT_OK


def _cmd_rosen_equiv(args):
    m1, m2 = _load_metric(args.metrics[0]), _load_metric(args.metrics[1])
    report = {"command": "rosen-equiv"}
    try:
        eq = rosen_isomorphic(m1, m2)
    except InconclusiveError as exc:
        report.update({"verdict": "inconclusive", "reason": str(exc)})
        _emit(report, args)
        return EXIT_INCONCLUSIVE
    if eq is None:
        report["verdict"] = "not_isometric"
    else:
        report.update({"verdict": "isometric", "witness": eq.witness.to_json(),
                       "composed_pullback_residual": eq.residual})
    _emit(report, args)
    return EXIT_OK


def _cmd_family(args):
    alpha = sequence_from_json(load_json(args.alpha))
    report = {"command": "family", "window": [alpha.lo, alpha.hi]}
    if args.shift:
        shifted = bernoulli_shift(alpha, args.shift)
        report["shifted_window"] = [shifted.lo, shifted.hi]
    if args.metric_out:
        dump_json(metric_to_json(family_metric(alpha)), args.metric_out)
        report["metric_out"] = args.metric_out
    if args.beta:
        beta = sequence_from_json(load_json(args.beta))
        report["distance"], report["distance_tail_bound"] = hilbert_distance(alpha, beta)
        if args.crosscheck:
            cc = family_isometry_crosscheck(alpha, beta)
            report["crosscheck"] = cc.to_json()
        else:
            report["shift_m"] = shift_equivalent(alpha, beta)
    _emit(report, args)
    return EXIT_OK


def _cmd_verify(args):
    report = {"command": "verify"}
    if args.field:
        metric = _load_metric(args.metric)
        if not isinstance(metric, BrinkmannMetric):
            raise PlaneWaveError("field verification expects a Brinkmann metric")
        fld, factor = field_from_json(metric, load_json(args.field))
        resid = killing_residual(metric, fld, S=factor, num=args.grid,
                                 seed=args.seed)
        report.update({"kind": "killing_residual", "residual": resid,
                       "passes": resid <= args.tol})
    elif args.map:
        source = _load_metric(args.source)
        target = _load_metric(args.target)
        pmap = point_map_from_json(load_json(args.map))
        pts = _sample_points(source, args.grid if args.grid < 200 else 50,
                             seed=args.seed)
        resid = pullback_residual(pmap, source, target, pts)
        report.update({"kind": "pullback_residual", "residual": resid,
                       "passes": resid <= args.tol})
    else:
        raise PlaneWaveError("verify needs --field or --map")
    _emit(report, args)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="planewaves",
        description="plane-wave metrics: conversions, symmetry algebras, "
                    "equivalence decisions, shift family")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("convert", help="convert between metric forms")
    p.add_argument("--input", required=True)
    p.add_argument("--to", required=True,
                   choices=["brinkmann", "rosen", "alekseevsky"])
    p.add_argument("--u0", type=float, default=None)
    _common(p)
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("killing", help="extra automorphism + commutant rotations")
    p.add_argument("--metric", required=True)
    _common(p)
    p.set_defaults(func=_cmd_killing)

    p = sub.add_parser("conformal", help="full conformal Killing algebra report")
    p.add_argument("--metric", required=True)
    _common(p)
    p.set_defaults(func=_cmd_conformal)

    p = sub.add_parser("equiv", help="decide isometry of two Brinkmann metrics")
    p.add_argument("metrics", nargs=2)
    _common(p)
    p.set_defaults(func=_cmd_equiv)

    p = sub.add_parser("rosen-equiv", help="decide isomorphism of Rosen universes")
    p.add_argument("metrics", nargs=2)
    _common(p)
    p.set_defaults(func=_cmd_rosen_equiv)

    p = sub.add_parser("family", help="shift-sequence family operations")
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta")
    p.add_argument("--crosscheck", action="store_true")
    p.add_argument("--shift", type=int, default=0)
    p.add_argument("--metric-out")
    _common(p)
    p.set_defaults(func=_cmd_family)

    p = sub.add_parser("verify", help="residuals for user-supplied fields/maps")
    p.add_argument("--metric")
    p.add_argument("--field")
    p.add_argument("--map")
    p.add_argument("--source")
    p.add_argument("--target")
    _common(p)
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    np.random.seed(args.seed if hasattr(args, "seed") else 0)
    try:
        return args.func(args)
    except InconclusiveError as exc:
        print(dump_json({"error": "inconclusive", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except PlaneWaveError as exc:
        print(dump_json({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(dump_json({"error": "io", "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
