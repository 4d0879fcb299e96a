"""Command-line interface.

Subcommands: formula, mc, oracle, fit, figure, compare.  Flags can also be
supplied through a config file of `key = value` lines (# starts a comment);
flags given on the command line override file values.

Exit codes: 0 success, 2 validation error, 3 exact-solver cap exceeded,
4 I/O error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import experiments, formulas, oracle
from .experiments import (DEFAULT_FIGURE_TRIALS, DEFAULT_MASTER_SEED,
                          ExperimentRecord, SamplerSpec, estimate,
                          write_records)
from .model import Boundary, DiffusionRates, ValidationError
from .ssa import SamplerModel

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ORACLE_CAP = 3
EXIT_IO = 4

_MODELS = {
    "bimol2d": SamplerModel.COLLISION_2W_2D,
    "trimol1d": SamplerModel.COLLISION_3W_1D,
    "bimol1d": SamplerModel.COLLISION_2W_1D,
}


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a `key = value` config file; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


_FLAG_TYPES = {
    "L": float, "K": int, "bc": str, "Du": float, "Dv": float, "Dw": float,
    "k1d": float, "k": float, "scaling": str, "trials": int, "seed": int,
    "out": str, "model": str, "tag": str, "out-dir": str, "csv": str,
    "estimator": str, "figure-tag": str, "init": str, "workers": int,
    "tol": float,
}


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset CLI flags from the config file, then apply defaults."""
    if getattr(args, "config", None):
        file_values = read_config(args.config)
        for key, text in file_values.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr):
                raise ValidationError(f"unknown config key {key!r}")
            if getattr(args, attr) is None:
                caster = _FLAG_TYPES.get(key, str)
                try:
                    setattr(args, attr, caster(text))
                except ValueError as exc:
                    raise ValidationError(f"bad value for config key {key!r}: {text!r}") from exc
    for attr, default in getattr(args, "_defaults", {}).items():
        if getattr(args, attr) is None:
            setattr(args, attr, default)
    return args


def _add_common(parser: argparse.ArgumentParser,
                defaults: dict[str, object]) -> None:
    parser.add_argument("--config", help="key = value file of flag defaults")
    parser.add_argument("--L", type=float)
    parser.add_argument("--K", type=int)
    parser.add_argument("--bc", choices=["periodic", "reflective"])
    parser.add_argument("--Du", type=float)
    parser.add_argument("--Dv", type=float)
    parser.add_argument("--Dw", type=float)
    parser.add_argument("--k1d", type=float)
    parser.add_argument("--k", type=float)
    parser.add_argument("--scaling", choices=["1d", "3d"])
    parser.add_argument("--model", choices=sorted(_MODELS))
    parser.add_argument("--out")
    parser.set_defaults(_defaults=defaults)


def _point_from_args(args: argparse.Namespace) -> experiments.FigurePoint:
    if args.L is None or args.K is None:
        raise ValidationError("--L and --K are required")
    bc = Boundary.PERIODIC if args.bc == "periodic" else Boundary.REFLECTIVE
    model_name = args.model
    if model_name is None:
        model_name = "trimol1d" if args.Dw is not None else "bimol2d"
    model = _MODELS[model_name]
    if model is SamplerModel.COLLISION_2W_2D:
        if args.Du is None or args.Dv is None:
            raise ValidationError("bimol2d needs --Du and --Dv")
        rates = DiffusionRates(args.Du, args.Dv, 0.0)
    elif model is SamplerModel.COLLISION_2W_1D:
        if args.Dv is None or args.Dw is None:
            raise ValidationError("bimol1d needs --Dv and --Dw")
        rates = DiffusionRates(0.0, args.Dv, args.Dw)
    else:
        if args.Du is None or args.Dv is None or args.Dw is None:
            raise ValidationError("trimol1d needs --Du, --Dv and --Dw")
        rates = DiffusionRates(args.Du, args.Dv, args.Dw)
    k_1d = None
    if args.k1d is not None and args.k is not None:
        raise ValidationError("give --k1d or --k, not both")
    if args.k1d is not None:
        k_1d = args.k1d
    elif args.k is not None:
        h = args.L / args.K
        if args.scaling == "1d":
            k_1d = args.k
        else:
            k_1d = args.k / h**4
    if k_1d is not None:
        if model is not SamplerModel.COLLISION_3W_1D:
            raise ValidationError(
                "reaction rates apply to the trimol1d model only")
        model = SamplerModel.REACTION_3W_1D
    return experiments.FigurePoint(model=model, boundary=bc, L=args.L,
                                   K=args.K, rates=rates, k_1d=k_1d)


def _emit(records: list[ExperimentRecord], out: str | None) -> None:
    if out:
        write_records(out, records)
    else:
        sys.stdout.write(",".join(experiments.CSV_HEADER) + "\n")
        for record in records:
            sys.stdout.write(",".join(record.to_row()) + "\n")


def _cmd_formula(args: argparse.Namespace) -> int:
    point = _point_from_args(args)
    record = experiments.ExperimentRecord(
        experiment_id="adhoc-000", figure_tag="", boundary=point.boundary.value,
        L=point.L, K=point.K, h=point.domain.h,
        **_rate_columns(point), estimator="formula",
        mean=experiments.formula_value(point), std_error=None,
        n_trials=None, seed=None)
    _emit([record], args.out)
    return EXIT_OK


def _cmd_mc(args: argparse.Namespace) -> int:
    point = _point_from_args(args)
    spec = SamplerSpec(point.model, point.domain, point.rates, point.scheme)
    summary = estimate(spec, args.trials, args.seed, n_workers=args.workers)
    record = experiments.ExperimentRecord(
        experiment_id="adhoc-000", figure_tag="", boundary=point.boundary.value,
        L=point.L, K=point.K, h=point.domain.h,
        **_rate_columns(point), estimator="mc",
        mean=summary.mean, std_error=summary.std_error,
        n_trials=summary.n_trials, seed=args.seed)
    _emit([record], args.out)
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    point = _point_from_args(args)
    init = (oracle.InitMode.UNIFORM_NON_TARGET if args.init == "noncollided"
            else oracle.InitMode.UNIFORM_ALL)
    value = None
    if point.model is SamplerModel.COLLISION_2W_2D:
        value = oracle.mfpt_collision_2walkers(
            point.domain, point.rates.Du, point.rates.Dv, init).expected_time
    elif point.model is SamplerModel.COLLISION_2W_1D:
        value = oracle.mfpt_collision_2walkers(
            point.domain, point.rates.Dv, point.rates.Dw, init).expected_time
    elif point.model is SamplerModel.REACTION_3W_1D:
        value = oracle.mean_reaction_time_3walkers_1d(
            point.domain, point.rates, point.scheme, init).expected_time
    else:
        value = oracle.mfpt_collision_3walkers_1d(
            point.domain, point.rates, init).expected_time
    record = experiments.ExperimentRecord(
        experiment_id="adhoc-000", figure_tag="", boundary=point.boundary.value,
        L=point.L, K=point.K, h=point.domain.h,
        **_rate_columns(point), estimator="oracle",
        mean=value, std_error=None, n_trials=None, seed=None)
    _emit([record], args.out)
    return EXIT_OK


def _rate_columns(point: experiments.FigurePoint) -> dict:
    if point.model is SamplerModel.COLLISION_2W_2D:
        du, dv, dw = point.rates.Du, point.rates.Dv, None
    elif point.model is SamplerModel.COLLISION_2W_1D:
        du, dv, dw = None, point.rates.Dv, point.rates.Dw
    else:
        du, dv, dw = point.rates.as_tuple()
    return dict(Du=du, Dv=dv, Dw=dw, k_value=point.k_1d,
                scaling="1d" if point.k_1d is not None else "")


def _cmd_figure(args: argparse.Namespace) -> int:
    path = experiments.reproduce_figure(
        args.tag, args.out_dir, n_trials=args.trials, master_seed=args.seed,
        n_workers=args.workers, with_oracle=not args.skip_oracle)
    print(path)
    return EXIT_OK


def _cmd_fit(args: argparse.Namespace) -> int:
    """Slope-pinned intercept fit per parameter set of a figure CSV."""
    rows = experiments.read_rows(args.csv)
    rows = [r for r in rows if r["estimator"] == args.estimator]
    if args.figure_tag:
        rows = [r for r in rows if r["figure_tag"] == args.figure_tag]
    if args.bc:
        rows = [r for r in rows if r["boundary"] == args.bc]
    groups: dict[tuple, list[dict[str, str]]] = {}
    for r in rows:
        if r["mean"] == "":
            continue
        key = (r["boundary"], r["Du"], r["Dv"], r["Dw"], r["L"])
        groups.setdefault(key, []).append(r)
    if not groups:
        raise ValidationError("no matching rows to fit")
    for key, group in groups.items():
        if len(group) < 3:
            continue
        L = float(group[0]["L"])
        du = float(group[0]["Du"]) if group[0]["Du"] else 0.0
        dv = float(group[0]["Dv"]) if group[0]["Dv"] else 0.0
        dw = float(group[0]["Dw"]) if group[0]["Dw"] else 0.0
        if group[0]["Du"] and group[0]["Dw"]:
            hat = formulas.TrimolRateSummary.from_rates(du, dv, dw).hat_D
            slope = L * L / (2.0 * math.pi * hat)
            rate_sum = sum(sorted((du, dv, dw))[:2])  # the two smaller rates
        else:
            pair = (du + dv) if group[0]["Du"] else (dv + dw)
            slope = L * L / (2.0 * math.pi * pair)
            rate_sum = pair
        points = [(float(r["h"]), float(r["mean"])) for r in group]
        fit = experiments.fit_intercept(points, L, slope, rate_sum)
        label = f"bc={key[0]} Du={key[1]} Dv={key[2]} Dw={key[3]}"
        print(f"{label}: intercept coefficient b = "
              f"{fit.fitted_intercept_coefficient:.6g} "
              f"(slope fixed {fit.fixed_slope:.6g}, residual rms "
              f"{fit.residual_rms:.3g}, {fit.n_points} points)")
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    rows = experiments.read_rows(args.csv)
    if args.figure_tag:
        rows = [r for r in rows if r["figure_tag"] == args.figure_tag]
    if not rows:
        raise ValidationError("no matching records")
    comparison = experiments.compare_records(rows, rel_tol=args.tol)
    print(experiments.format_comparison(comparison))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxfpt",
        description="Collision and reaction times on compartment lattices: "
                    "closed-form estimates, exact solves, and Monte Carlo.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("formula", help="evaluate the closed-form estimate")
    _add_common(p, {"bc": "periodic"})
    p.set_defaults(func=_cmd_formula)

    p = sub.add_parser("mc", help="Monte Carlo estimate with standard error")
    _add_common(p, {"bc": "periodic", "trials": DEFAULT_FIGURE_TRIALS,
                    "seed": DEFAULT_MASTER_SEED, "workers": 1})
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("oracle", help="exact Markov-chain expected time")
    _add_common(p, {"bc": "periodic", "init": "all"})
    p.add_argument("--init", choices=["all", "noncollided"])
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("fit", help="slope-pinned intercept fit on a figure CSV")
    p.add_argument("--config", help="key = value file of flag defaults")
    p.add_argument("--csv", required=True)
    p.add_argument("--estimator", default="mc", choices=["formula", "mc", "oracle"])
    p.add_argument("--figure-tag", dest="figure_tag")
    p.add_argument("--bc", choices=["periodic", "reflective"])
    p.set_defaults(func=_cmd_fit, _defaults={})

    p = sub.add_parser("figure", help="reproduce one figure's dataset as CSV")
    p.add_argument("--config", help="key = value file of flag defaults")
    p.add_argument("--tag", choices=experiments.FIGURE_TAGS)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--skip-oracle", dest="skip_oracle", action="store_true",
                   help="omit the exact-solver rows (Monte Carlo and formula only)")
    p.set_defaults(func=_cmd_figure,
                   _defaults={"trials": DEFAULT_FIGURE_TRIALS,
                              "seed": DEFAULT_MASTER_SEED, "workers": 1,
                              "out_dir": "."})

    p = sub.add_parser("compare", help="deviation report over a figure CSV")
    p.add_argument("--config", help="key = value file of flag defaults")
    p.add_argument("--csv", required=True)
    p.add_argument("--figure-tag", dest="figure_tag")
    p.add_argument("--tol", type=float)
    p.set_defaults(func=_cmd_compare, _defaults={"tol": 0.10})

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        if args.command == "figure" and args.tag is None:
            raise ValidationError("--tag is required")
        return args.func(args)
    except oracle.OracleCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_CAP
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
