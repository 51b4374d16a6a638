"""Command line entry point ``simulate``.

    simulate <preset|config.json> [--out DIR] [--seed N] [--strict] [--threads N]
    simulate shorttime <preset|config.json> [--out DIR]
    simulate classical <preset|config.json> [--out DIR] [--seed N]
    simulate fit SERIES.csv
    simulate analytic [--hbar H] [--omega W] [--lam L] [--g G] [--initial q1 p1 q2 p2] ...
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from ..bec_analytic import alphas_from_points, analytic_series, revival_time
from ..dynamics import EntropySeries
from .config import PRESETS, ConfigError, load_config
from .fitting import fit_saturation
from .runner import (read_series_csv, run_classical, run_experiment, run_shorttime,
                     write_series_csv)

EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_LEAKAGE = 3


def _source_parser(prog, seed=True):
    ap = argparse.ArgumentParser(prog=prog)
    ap.add_argument("source", help=f"preset ({', '.join(PRESETS)}) or path to a JSON config")
    ap.add_argument("--out", default=None, help="output directory")
    if seed:
        ap.add_argument("--seed", type=int, default=None)
    return ap


def _load(args):
    cfg = load_config(args.source)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    out = args.out or cfg.get("outputs", {}).get("dir") or f"runs/{cfg.name}"
    return cfg, out


def _main_run(argv):
    ap = _source_parser("simulate")
    ap.add_argument("--strict", action="store_true",
                    help="exit non-zero when a run exceeds the truncation leakage bound")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    cfg, out = _load(args)
    summary = run_experiment(cfg, out, threads=args.threads)
    print(f"wrote {len(summary['members'])} member(s) to {out}")
    if not summary["leakage_ok"]:
        print("warning: truncation leakage bound exceeded", file=sys.stderr)
        if args.strict:
            return EXIT_LEAKAGE
    return 0


def _shorttime(argv):
    args = _source_parser("simulate shorttime", seed=False).parse_args(argv)
    cfg, out = _load(args)
    summary = run_shorttime(cfg, out)
    for row in summary["members"]:
        print(f"hbar={row['hbar']:g} two_j={row['two_j']} correlation={row['correlation']:.10g} "
              f"fit={row['fit']:.10g}")
    return 0


def _classical(argv):
    args = _source_parser("simulate classical").parse_args(argv)
    cfg, out = _load(args)
    summary = run_classical(cfg, out)
    for row in summary["members"]:
        print(f"hbar={row['hbar']:g} linf_to_quantum={row['linf_to_quantum']:.4g} "
              f"noise_max={row['noise_max']}")
    return 0


def _fit(argv):
    ap = argparse.ArgumentParser(prog="simulate fit")
    ap.add_argument("csv", help="two-column t,S series")
    args = ap.parse_args(argv)
    t, s = read_series_csv(args.csv)
    fit = fit_saturation(EntropySeries(t, s))
    print(json.dumps({"a0": fit.a0, "a1": fit.a1, "rms": fit.rms, "converged": fit.converged,
                      "stderr": list(fit.stderr), **fit.diagnostics}, indent=2))
    return 0


def _analytic(argv):
    ap = argparse.ArgumentParser(prog="simulate analytic")
    ap.add_argument("--hbar", type=float, default=1.0)
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--lam", type=float, default=0.2)
    ap.add_argument("--g", type=float, default=0.1)
    ap.add_argument("--initial", type=float, nargs=4, default=[1.0, 1.0, 1.0, 1.0],
                    metavar=("q1", "p1", "q2", "p2"))
    ap.add_argument("--t-max", type=float, default=None,
                    help="defaults to the revival time pi/(g hbar)")
    ap.add_argument("--n-points", type=int, default=801)
    ap.add_argument("--out", default=None, help="CSV path; stdout when omitted")
    args = ap.parse_args(argv)
    t_max = args.t_max if args.t_max is not None else revival_time(args.g, args.hbar)
    t = np.linspace(0.0, t_max, args.n_points)
    s = analytic_series(t, alphas_from_points(*args.initial, args.hbar), args.omega, args.lam,
                        args.g, args.hbar)
    if args.out:
        write_series_csv(args.out, t, s)
    else:
        sys.stdout.write("t,S\n")
        for ti, si in zip(t, s):
            sys.stdout.write(f"{ti:.17g},{si:.17g}\n")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"shorttime": _shorttime, "classical": _classical, "fit": _fit,
                "analytic": _analytic}
    try:
        if argv and argv[0] in handlers:
            return handlers[argv[0]](argv[1:])
        return _main_run(argv)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
