"""Experiment driver CLI.

Subcommands: count, include, sample, lscan, clt, bound, lpp, oracle.
Options may come from ``--config FILE`` (line-oriented ``key=value``,
keys matching the long option names); command-line flags override the
file.  Results are written atomically as CSV or JSON, every row
carrying the parameters needed to rerun it.

Exit codes: 0 ok, 1 failed oracle check, 2 config/parameter error,
3 infeasible ensemble, 4 enumeration cap exceeded, 5 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

import numpy as np

from . import kernels, lpp, qclt, scaling
from ._io import rows_to_csv, rows_to_json, write_rows
from .environment import WeightDistribution
from .errors import (CornerGrowthError, EnumerationCapError,
                     InfeasibleEnsembleError, ParameterError)
from .paths import (AllPaths, PathEnsemble, Waypoints, build_counts,
                    enumerate_paths, hole_ensemble, sample_path)
from .rng import derive_seed

EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_CAP = 4
EXIT_NUMERIC = 5


class ConfigError(ParameterError):
    pass


# ---------------------------------------------------------------------------
# Option plumbing
# ---------------------------------------------------------------------------

def _parse_cells(text: str):
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        x, y = part.split(",")
        out.append((int(x), int(y)))
    return tuple(out)


def _parse_fracs(text: str):
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        x, y = part.split(",")
        out.append((float(x), float(y)))
    return tuple(out)


def _parse_grid(text: str):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill unset options from the config file; reject unknown keys."""
    if not getattr(args, "config", None):
        return
    actions = {a.dest: a for a in parser._actions if a.dest != "help"}
    try:
        with open(args.config) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{args.config}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        dest = key.strip().replace("-", "_")
        if dest not in actions or dest == "config":
            raise ConfigError(f"{args.config}:{lineno}: unknown key {key.strip()!r}")
        if getattr(args, dest) is None:
            action = actions[dest]
            conv = action.type or str
            setattr(args, dest, conv(value.strip()))


def _default(args, name, value):
    if getattr(args, name) is None:
        setattr(args, name, value)


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return max(1, int(args.threads))
    envval = os.environ.get("QCLT_THREADS", "").strip()
    return max(1, int(envval)) if envval else 1


def _ensemble_from_args(args) -> PathEnsemble:
    kind = args.ensemble or "all"
    if kind == "all":
        return PathEnsemble(args.M, args.N)
    if kind == "waypoints":
        if not args.waypoints:
            raise ParameterError("--waypoints required for the waypoints ensemble")
        return PathEnsemble(args.M, args.N, Waypoints(_parse_cells(args.waypoints)))
    if kind == "hole":
        if args.M is not None and args.N is not None and args.M != args.N:
            raise ParameterError("hole ensemble requires M = N")
        if args.beta is None and args.B is None:
            raise ParameterError("--beta or --B required for the hole ensemble")
        return hole_ensemble(args.N, beta=args.beta, B=args.B)
    raise ParameterError(f"unknown ensemble kind {kind!r}")


def _family_from_args(args):
    """N -> PathEnsemble builder for grid commands (sizes scale with N)."""
    kind = args.ensemble or "all"
    xi = args.xi if args.xi is not None else 1.0
    if kind == "all":
        return lambda N: PathEnsemble(max(1, int(xi * N)), N)
    if kind == "waypoints":
        fracs = _parse_fracs(args.waypoints_frac or "0.5,0.5")

        def family(N):
            pts = tuple((int(fx * N), int(fy * N)) for fx, fy in fracs)
            return PathEnsemble(max(1, int(xi * N)), N, Waypoints(pts))
        return family
    if kind == "hole":
        beta = args.beta if args.beta is not None else 0.5
        return lambda N: hole_ensemble(N, beta=beta)
    raise ParameterError(f"unknown ensemble kind {kind!r}")


def _dist_from_args(args) -> WeightDistribution:
    name = args.dist or "normal"
    if name == "rademacher":
        return WeightDistribution("rademacher")
    if name == "normal":
        return WeightDistribution("normal")
    if name == "exponential":
        return WeightDistribution("exponential", rate=args.rate if args.rate is not None else 1.0)
    if name == "geometric":
        if args.q is None:
            raise ParameterError("--q required for the geometric distribution")
        return WeightDistribution("geometric", q=args.q)
    if name == "uniform":
        return WeightDistribution("uniform")
    raise ParameterError(f"unknown distribution {name!r}")


def _emit(args, rows, summary: str) -> None:
    fmt = args.format or "csv"
    if args.out:
        write_rows(args.out, rows, fmt)
    else:
        text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
        sys.stdout.write(text)
    print(summary)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_count(args) -> int:
    ct = build_counts(_ensemble_from_args(args))
    if ct.Z is not None:
        print(ct.Z)
    else:
        print(f"exp({ct.Z_log:.9f})")
    return 0


def cmd_include(args) -> int:
    if not args.cell:
        raise ParameterError("--cell i,j required")
    ct = build_counts(_ensemble_from_args(args))
    (cell,) = _parse_cells(args.cell)
    print(repr(ct.inclusion_probability(cell)))
    return 0


def cmd_sample(args) -> int:
    _default(args, "n_paths", 1)
    _default(args, "seed", 0)
    ct = build_counts(_ensemble_from_args(args))
    rows = []
    for idx in range(args.n_paths):
        path = sample_path(ct, derive_seed(args.seed, idx))
        rows.append({"index": idx, "M": args.M, "N": args.N,
                     "seed": args.seed, "steps": path.to_steps()})
    _emit(args, rows, f"sampled {args.n_paths} path(s) from a {args.M}x{args.N} ensemble")
    return 0


def cmd_lscan(args) -> int:
    if not args.grid:
        raise ParameterError("--grid required")
    report = scaling.fit_lambda(_family_from_args(args), _parse_grid(args.grid))
    rows = [dict(r, lambda_hat=report.lambda_hat, eta=report.eta,
                 r2=report.regression_r2, ensemble=args.ensemble or "all")
            for r in report.rows()]
    _emit(args, rows, f"lambda_hat={report.lambda_hat:.6f} eta={report.eta:.4f} "
                      f"r2={report.regression_r2:.6f}")
    return 0


def cmd_clt(args) -> int:
    if not args.grid:
        raise ParameterError("--grid required")
    _default(args, "n_paths", 10**5)
    _default(args, "env_seed", 1)
    _default(args, "path_seed", 2)
    result = qclt.convergence_experiment(
        _dist_from_args(args), _family_from_args(args), _parse_grid(args.grid),
        args.n_paths, args.env_seed, args.path_seed,
        threads=_resolve_threads(args),
        fresh_env_per_N=not args.fixed_env_seed,
    )
    _emit(args, list(result.rows),
          f"ks first={result.ks_first:.5f} last={result.ks_last:.5f} "
          f"decreased={result.decreased}")
    return 0


def cmd_bound(args) -> int:
    for name in ("n", "m", "L", "K", "p", "R", "s", "t"):
        if getattr(args, name) is None:
            raise ParameterError(f"--{name} required")
    params = scaling.ConcentrationParams(
        n=args.n, m=args.m, L=args.L, K=args.K, p=args.p, R=args.R,
        s=args.s, t=args.t,
        kappa=args.kappa if args.kappa is not None else 1.0,
        C=args.C if args.C is not None else 1.0,
        c=args.c if args.c is not None else 1.0,
    )
    b = scaling.concentration_bound(params)
    rows = [{"n": args.n, "m": args.m, "L": args.L, "K": args.K, "p": args.p,
             "R": args.R, "s": args.s, "t": args.t,
             "epsilon": b.epsilon, "prob_bound": b.prob_bound,
             "prob_bound_raw": b.prob_bound_raw}]
    _emit(args, rows, f"epsilon={b.epsilon!r} prob_bound={b.prob_bound!r} "
                      f"raw={b.prob_bound_raw!r}")
    return 0


def cmd_lpp(args) -> int:
    kind = args.kind or "exponential"
    _default(args, "N", 500)
    _default(args, "n_env", 20)
    _default(args, "seed", 0)
    res = lpp.typical_vs_max(kind, args.N, args.n_env, args.seed, q=args.q)
    rows = []
    for r in range(args.n_env):
        w = lpp.raw_weight_grid(kind, args.N, args.seed, r, q=args.q)
        g = float(kernels.lpp_grid(w)[args.N - 1, args.N - 1])
        rows.append({"kind": kind, "q": args.q, "N": args.N, "seed": args.seed,
                     "env_index": r, "G": g, "G_over_N": g / args.N,
                     "predicted_G": res.predicted_G,
                     "predicted_typical": res.predicted_typical})
    _emit(args, rows,
          f"mean G/N={res.mean_G_over_N:.5f} (predicted {res.predicted_G:.5f}); "
          f"typical/N={res.typical_over_N:.5f} (predicted {res.predicted_typical:.5f})")
    return 0


def cmd_oracle(args) -> int:
    check = args.check or "inclusion"
    ens = _ensemble_from_args(args)
    ct = build_counts(ens)
    paths = list(enumerate_paths(ens))
    if check == "counts":
        ok = ct.Z == len(paths)
        print(f"{'enumeration == DP' if ok else 'MISMATCH'}: Z={ct.Z} enumerated={len(paths)}")
        return 0 if ok else EXIT_CHECK_FAILED
    if check == "inclusion":
        visits: dict = {}
        for path in paths:
            for cell in path.cells:
                visits[cell] = visits.get(cell, 0) + 1
        ok = ct.Z == len(paths)
        for i in range(1, ens.M + 1):
            for j in range(1, ens.N + 1):
                dp = ct.inclusion_fraction((i, j))
                enum = Fraction(visits.get((i, j), 0), len(paths))
                ok = ok and dp == enum
        print("enumeration == DP" if ok else "MISMATCH between enumeration and DP")
        return 0 if ok else EXIT_CHECK_FAILED
    if check == "sample":
        from scipy.stats import chi2
        _default(args, "n_paths", 10_000)
        _default(args, "seed", 0)
        index = {p.to_steps(): k for k, p in enumerate(paths)}
        counts = np.zeros(len(paths))
        for idx in range(args.n_paths):
            p = sample_path(ct, derive_seed(args.seed, idx))
            counts[index[p.to_steps()]] += 1
        expected = args.n_paths / len(paths)
        stat = float(np.sum((counts - expected) ** 2 / expected))
        quantile = float(chi2.ppf(0.999, len(paths) - 1))
        ok = stat < quantile
        print(f"chi2={stat:.3f} threshold={quantile:.3f} "
              f"({'uniform' if ok else 'NOT uniform'})")
        return 0 if ok else EXIT_CHECK_FAILED
    raise ParameterError(f"unknown check {check!r}")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--out", help="output file (written atomically)")
    p.add_argument("--format", choices=["csv", "json"], help="output format (default csv)")
    p.add_argument("--threads", type=int, help="worker threads (default $QCLT_THREADS or 1)")


def _add_ensemble(p, grid_family=False):
    p.add_argument("--ensemble", choices=["all", "waypoints", "hole"])
    p.add_argument("--beta", type=float, help="hole proportion in (0,1)")
    p.add_argument("--B", type=int, help="hole side length (alternative to --beta)")
    if grid_family:
        p.add_argument("--xi", type=float, help="aspect ratio M = floor(xi*N), default 1")
        p.add_argument("--waypoints-frac", dest="waypoints_frac",
                       help="waypoints as fractions of N, e.g. '0.5,0.5;0.7,0.8'")
    else:
        p.add_argument("--M", type=int, required=False)
        p.add_argument("--N", type=int, required=False)
        p.add_argument("--waypoints", help="absolute waypoint cells, e.g. '2,2;4,5'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cornergrowth",
        description="Up-right path ensembles in random environments: exact "
                    "counting, sampling, and quenched-CLT experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="number of admissible paths")
    _add_ensemble(p)
    _add_common(p)
    p.set_defaults(fn=cmd_count, parser_ref=p)

    p = sub.add_parser("include", help="inclusion probability of one cell")
    _add_ensemble(p)
    p.add_argument("--cell", help="cell as 'i,j'")
    _add_common(p)
    p.set_defaults(fn=cmd_include, parser_ref=p)

    p = sub.add_parser("sample", help="uniform path samples as step strings")
    _add_ensemble(p)
    p.add_argument("--n-paths", dest="n_paths", type=int)
    p.add_argument("--seed", type=int)
    _add_common(p)
    p.set_defaults(fn=cmd_sample, parser_ref=p)

    p = sub.add_parser("lscan", help="L(N) scan with log-log slope fit")
    _add_ensemble(p, grid_family=True)
    p.add_argument("--grid", help="comma-separated N values")
    _add_common(p)
    p.set_defaults(fn=cmd_lscan, parser_ref=p)

    p = sub.add_parser("clt", help="quenched Gaussian-distance experiment")
    _add_ensemble(p, grid_family=True)
    p.add_argument("--dist", choices=["rademacher", "normal", "exponential",
                                      "geometric", "uniform"])
    p.add_argument("--rate", type=float, help="exponential rate (default 1)")
    p.add_argument("--q", type=float, help="geometric parameter")
    p.add_argument("--grid", help="comma-separated N values")
    p.add_argument("--n-paths", dest="n_paths", type=int)
    p.add_argument("--env-seed", dest="env_seed", type=int)
    p.add_argument("--path-seed", dest="path_seed", type=int)
    p.add_argument("--fixed-env-seed", dest="fixed_env_seed", action="store_true",
                   default=False, help="reuse one env seed stream across N")
    _add_common(p)
    p.set_defaults(fn=cmd_clt, parser_ref=p)

    p = sub.add_parser("bound", help="concentration-bound evaluator")
    for name, typ in (("n", int), ("m", int), ("L", float), ("K", float),
                      ("p", float), ("R", float), ("s", float), ("t", float),
                      ("kappa", float), ("C", float), ("c", float)):
        p.add_argument(f"--{name}", type=typ)
    _add_common(p)
    p.set_defaults(fn=cmd_bound, parser_ref=p)

    p = sub.add_parser("lpp", help="last-passage vs typical energy comparator")
    p.add_argument("--kind", choices=["exponential", "geometric"])
    p.add_argument("--q", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--n-env", dest="n_env", type=int)
    p.add_argument("--seed", type=int)
    _add_common(p)
    p.set_defaults(fn=cmd_lpp, parser_ref=p)

    p = sub.add_parser("oracle", help="enumeration-vs-DP consistency checks")
    _add_ensemble(p)
    p.add_argument("--check", choices=["counts", "inclusion", "sample"])
    p.add_argument("--n-paths", dest="n_paths", type=int)
    p.add_argument("--seed", type=int)
    _add_common(p)
    p.set_defaults(fn=cmd_oracle, parser_ref=p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, args.parser_ref)
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InfeasibleEnsembleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CornerGrowthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
