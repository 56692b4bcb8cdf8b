"""Command-line entry point: wires flag/file configs to the experiment
drivers and emits machine-readable JSON/CSV reports.

Exit codes: 0 ok, 2 configuration error, 3 identity/inequality suite
failure, 4 degenerate variance.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime
import json
import sys
from typing import Optional

import numpy as np

from . import __version__
from .bounds import BoundConfig, kolmogorov_bound
from .core import Functional, SeedPolicy, value_table
from .errors import ConfigError, DegenerateVariance, SteinboundsError
from .experiments import (
    covering_experiment,
    identity_suite,
    stein_suite,
    voronoi_experiment,
)
from .functionals import (
    FUNCTIONAL_IDS,
    make_distribution,
    make_functional,
    make_radius_law,
    make_shape,
)
from .hoeffding import (
    decompose_table,
    degeneracy_residual,
    direct_variance,
    reconstruction_residual,
    variance_expansion,
)
from .mc import empirical_kolmogorov, fit_rate, replicate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IDENTITY = 3
EXIT_DEGENERATE = 4


def _parse_n_list(text: str) -> list:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad size list {text!r}") from exc
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("size list must be strictly increasing")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steinbounds",
        description="Normal-approximation bound verification for functionals "
                    "of binomial point processes",
    )
    parser.add_argument("--config", help="INI config file; one section per "
                                         "subcommand, flags override")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help=argparse.SUPPRESS)
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--csv", help="also write flat CSV rows here")

    p = sub.add_parser("verify-identities", help="exact decomposition and "
                       "interpolation identity suites on finite alphabets")
    p.add_argument("--alphabet", type=int, default=3)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-10)
    common(p)

    p = sub.add_parser("stein-check", help="sweep the Stein-kernel bounds "
                       "and inequalities on a dense grid")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--lo", type=float, default=-6.0)
    p.add_argument("--hi", type=float, default=6.0)
    common(p)

    p = sub.add_parser("bound", help="Monte Carlo Kolmogorov/Wasserstein "
                       "bound report for a named functional")
    p.add_argument("--functional", default="sum", choices=FUNCTIONAL_IDS)
    p.add_argument("--dist", default="pm1")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--k-inner", type=int, default=8)
    common(p)

    p = sub.add_parser("rates", help="sweep sizes and fit log-log "
                       "convergence rates of a statistic")
    p.add_argument("--functional", default="sum", choices=FUNCTIONAL_IDS)
    p.add_argument("--dist", default="pm1")
    p.add_argument("--shape", default="ball")
    p.add_argument("--radius", type=float, default=0.3)
    p.add_argument("--n", default="64,128,256,512")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--grid-m", type=int, default=20000)
    p.add_argument("--density", type=float, default=128.0)
    common(p)

    p = sub.add_parser("voronoi", help="set-approximation experiment: "
                       "moments, normal distance, and bound reports")
    p.add_argument("--shape", default="ball")
    p.add_argument("--radius", type=float, default=0.3)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", default="250,500,1000")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--grid-m", type=int, default=200000)
    p.add_argument("--bound-reps", type=int, default=48)
    p.add_argument("--bound-grid-m", type=int, default=20000)
    p.add_argument("--no-bounds", action="store_true")
    common(p)

    p = sub.add_parser("covering", help="germ-grain covering experiment: "
                       "volume and isolated-count statistics")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--radius-law", default="constant",
                   choices=("constant", "uniform", "pareto"))
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--n", default="250,500,1000")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--density", type=float, default=128.0)
    common(p)

    p = sub.add_parser("hoeffding", help="exact decomposition report for a "
                       "random table functional")
    p.add_argument("--alphabet", type=int, default=3)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--functional", default="random",
                   choices=("random", "sum", "pairprod"))
    common(p)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list) -> list:
    """Set per-subcommand defaults from the INI file; flags still override."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError as exc:
        raise ConfigError("--config needs a path") from exc
    ini = configparser.ConfigParser()
    read = ini.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    command = next((a for a in argv if not a.startswith("-") and a != path), None)
    if command and ini.has_section(command):
        defaults = {k.replace("-", "_"): v for k, v in ini.items(command)}
        for action in parser._subparsers._group_actions:  # noqa: SLF001
            if command in action.choices:
                action.choices[command].set_defaults(**defaults)
    return argv


def _jsonify(obj):
    """Coerce numpy scalars/arrays so reports serialize canonically."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _emit(payload: dict, args, rows: Optional[list] = None) -> None:
    report = {
        "meta": {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "version": __version__,
        },
        "payload": _jsonify(payload),
    }
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if args.csv and rows is not None:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["experiment_id", "n", "statistic", "value", "se"])
            writer.writerows(rows)


def _rows_from_per_n(experiment_id: str, per_n: list, stats: dict) -> list:
    rows = []
    for entry in per_n:
        for stat, (vkey, skey) in stats.items():
            val = entry
            for part in vkey.split("."):
                val = val[part]
            se = ""
            if skey:
                se = entry
                for part in skey.split("."):
                    se = se[part]
            rows.append([experiment_id, entry["n"], stat, val, se])
    return rows


def _cmd_verify_identities(args) -> int:
    payload = identity_suite(args.alphabet, args.n, args.trials,
                             SeedPolicy(args.seed))
    payload["tolerance"] = args.tol
    payload["ok"] = payload["max_residual"] <= args.tol
    _emit(payload, args)
    return EXIT_OK if payload["ok"] else EXIT_IDENTITY


def _cmd_stein_check(args) -> int:
    payload = stein_suite(step=args.step, lo=args.lo, hi=args.hi)
    _emit(payload, args)
    return EXIT_OK if payload["all_ok"] else EXIT_IDENTITY


def _cmd_bound(args) -> int:
    policy = SeedPolicy(args.seed)
    dist = make_distribution(args.dist)
    f = make_functional(args.functional, dist, args.n, policy)
    # factories yield one fixed grid, shared by every evaluation of this run
    functional = f if isinstance(f, Functional) else f(0)
    cfg = BoundConfig(policy=policy, outer=args.reps, k_inner=args.k_inner)
    report = kolmogorov_bound(functional, dist, args.n, cfg)
    payload = report.to_dict()
    payload["functional"] = args.functional
    payload["dist"] = args.dist
    payload["dominates_empirical"] = (
        report.empirical_dK
        <= report.kolmogorov_bound_intermed + report.dkw_band)
    _emit(payload, args)
    return EXIT_OK


def _cmd_rates(args) -> int:
    policy = SeedPolicy(args.seed)
    n_list = _parse_n_list(args.n)
    if args.functional == "voronoi":
        shape = make_shape(args.shape, d=2, radius=args.radius)
        payload = voronoi_experiment(shape, n_list, args.reps, args.grid_m,
                                     policy, run_bounds=False)
        rows = _rows_from_per_n(
            "rates-voronoi", payload["per_n"],
            {"mean": ("mean", "se_mean"),
             "variance": ("variance", "variance_se"),
             "dK": ("empirical_dK", "dkw_band")})
    elif args.functional.startswith("covering"):
        law = make_radius_law("constant", radius=args.radius)
        payload = covering_experiment(law, 2, n_list, args.reps,
                                      args.density, policy)
        tag = "volume" if args.functional.endswith("volume") else "isolated"
        values = [e[tag]["variance"] for e in payload["per_n"]]
        payload["variance_fit"] = fit_rate(n_list, values).to_dict()
        rows = [[f"rates-{args.functional}", e["n"], "variance",
                 e[tag]["variance"], ""] for e in payload["per_n"]]
    else:
        dist = make_distribution(args.dist)
        per_n = []
        for n in n_list:
            sub = policy.child(f"rates-n{n}")
            f = make_functional(args.functional, dist, n, sub)
            res = replicate(f, dist, n, args.reps, sub)
            d_k, band = empirical_kolmogorov(res.values)
            per_n.append({"n": n, "mean": res.mean, "se_mean": res.se_mean,
                          "variance": res.variance,
                          "variance_se": res.variance_se,
                          "empirical_dK": d_k, "dkw_band": band})
        payload = {
            "functional": args.functional, "dist": args.dist,
            "reps": args.reps, "master_seed": policy.master_seed,
            "per_n": per_n,
            "dK_fit": fit_rate(n_list, [e["empirical_dK"] for e in per_n]).to_dict(),
        }
        rows = _rows_from_per_n(
            f"rates-{args.functional}", per_n,
            {"variance": ("variance", "variance_se"),
             "dK": ("empirical_dK", "dkw_band")})
    _emit(payload, args, rows)
    return EXIT_OK


def _cmd_voronoi(args) -> int:
    policy = SeedPolicy(args.seed)
    shape = make_shape(args.shape, d=args.d, radius=args.radius)
    payload = voronoi_experiment(
        shape, _parse_n_list(args.n), args.reps, args.grid_m, policy,
        bound_outer=args.bound_reps, bound_grid_m=args.bound_grid_m,
        run_bounds=not args.no_bounds)
    rows = _rows_from_per_n(
        "voronoi", payload["per_n"],
        {"mean": ("mean", "se_mean"),
         "variance": ("variance", "variance_se"),
         "dK": ("empirical_dK", "dkw_band")})
    _emit(payload, args, rows)
    return EXIT_OK


def _cmd_covering(args) -> int:
    policy = SeedPolicy(args.seed)
    law = make_radius_law(args.radius_law, radius=args.radius)
    payload = covering_experiment(law, args.d, _parse_n_list(args.n),
                                  args.reps, args.density, policy)
    rows = []
    for entry in payload["per_n"]:
        for tag in ("volume", "isolated"):
            rows.append(["covering", entry["n"], f"{tag}-variance",
                         entry[tag]["variance"], ""])
            rows.append(["covering", entry["n"], f"{tag}-dK",
                         entry[tag]["empirical_dK"], entry[tag]["dkw_band"]])
    _emit(payload, args, rows)
    return EXIT_OK


def _cmd_hoeffding(args) -> int:
    policy = SeedPolicy(args.seed)
    dist = make_distribution(f"alphabet{args.alphabet}")
    if args.functional == "random":
        table = policy.stream(0, "X").uniform(
            -1.0, 1.0, size=(args.alphabet,) * args.n)
    else:
        f = make_functional(args.functional, dist, args.n, policy)
        table = value_table(f, dist, args.n)
    report = decompose_table(table, dist.weights)
    payload = {
        "alphabet": args.alphabet,
        "n": args.n,
        "functional": args.functional,
        "master_seed": policy.master_seed,
        "mean": report.mean,
        "variance": direct_variance(table, dist.weights),
        "variance_expansion": variance_expansion(report),
        "reconstruction_residual": reconstruction_residual(report),
        "degeneracy_residual": degeneracy_residual(report),
        "kernel_second_moments": {
            "+".join(str(i) for i in key): val
            for key, val in sorted(report.per_kernel_second_moment.items())
        },
    }
    _emit(payload, args)
    return EXIT_OK


_COMMANDS = {
    "verify-identities": _cmd_verify_identities,
    "stein-check": _cmd_stein_check,
    "bound": _cmd_bound,
    "rates": _cmd_rates,
    "voronoi": _cmd_voronoi,
    "covering": _cmd_covering,
    "hoeffding": _cmd_hoeffding,
}


def main(argv: Optional[list] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateVariance as exc:
        print(f"degenerate variance: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except SteinboundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
