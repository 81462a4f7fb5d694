"""Command-line driver for the model experiments.

Exit status: 0 when every run converged, 2 when some run did not, 1 on a
usage or configuration error.
"""

import argparse
import json
import os
import sys

from .experiments import (EXPERIMENTS, ExperimentSpec, compare, run_experiment, write_csv,
                          write_hierarchy)
from .plotting import render_plot
from .solve import METHODS

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2

# config keys -> ExperimentSpec fields
SPEC_KEYS = {"experiment": "name", "n": "N", "method": "method", "tol": "tol", "nu": "nu",
             "epsilon": "epsilon", "max_iters": "max_iters", "gs_cap": "gs_cap",
             "theta": "theta"}
OUTPUT_KEYS = ("out", "plot", "dump_hierarchy", "out_dir")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_common(p):
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--n", type=int, help="number of elements per direction")
    p.add_argument("--tol", type=float, help="relative residual (or nonlinear) tolerance")
    p.add_argument("--nu", type=int, help="sweeps per level (default 2)")
    p.add_argument("--epsilon", type=float, help="thresholding margin (default 1e-4)")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--gs-cap", type=int,
                   help="Gauss-Seidel correction cap, in updates per non-positive point")
    p.add_argument("--theta", type=float, help="strength threshold (default 0.25)")
    p.add_argument("--plot", metavar="SVG")
    p.add_argument("--config", metavar="JSON", help="JSON file with any of the flags above")


def build_parser():
    parser = _Parser(prog="unigrid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    run = sub.add_parser("run", help="run one method on one experiment")
    _add_common(run)
    run.add_argument("--method", choices=METHODS)
    run.add_argument("--out", metavar="CSV")
    run.add_argument("--dump-hierarchy", metavar="JSON")
    cmp_ = sub.add_parser("compare", help="run every applicable method on one experiment")
    _add_common(cmp_)
    cmp_.add_argument("--out-dir", default=".", help="directory for the per-method CSV files")
    return parser


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = set(cfg) - set(SPEC_KEYS) - set(OUTPUT_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return cfg


def _settings(args):
    cfg = _load_config(args.config) if args.config else {}
    for key in list(SPEC_KEYS) + list(OUTPUT_KEYS):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if "experiment" not in cfg:
        raise UsageError("--experiment is required (or give it in --config)")
    spec_kw = {SPEC_KEYS[k]: v for k, v in cfg.items() if k in SPEC_KEYS}
    try:
        spec = ExperimentSpec(**spec_kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    return spec, cfg


def _report(result):
    status = "converged" if result.converged else "NOT converged"
    line = (f"{result.spec.name} N={result.spec.N} {result.spec.method}: {status} "
            f"after {result.iterations} iterations")
    if result.rel_residuals:
        line += f", final relative residual {result.rel_residuals[-1]:.3e}"
    pos = result.positivity
    if pos and result.spec.method != "amg":
        work = pos["points_recovered"] + pos["gs_point_updates"]
        n = (result.spec.N - 1) ** (2 if result.spec.name.startswith("2d") else 1)
        line += f", positivity work {work / n:.3g} n, violations {pos['violations']}"
    if result.error:
        line += f" [{result.error}]"
    print(line)


def _cmd_run(args):
    spec, cfg = _settings(args)
    if "method" not in cfg:
        raise UsageError("--method is required (or give it in --config)")
    result = run_experiment(spec)
    _report(result)
    if cfg.get("out"):
        write_csv(result, cfg["out"])
    if cfg.get("plot"):
        render_plot([result], cfg["plot"], title=f"{spec.name}, N={spec.N}")
    if cfg.get("dump_hierarchy"):
        write_hierarchy(result, cfg["dump_hierarchy"])
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _cmd_compare(args):
    spec, cfg = _settings(args)
    out_dir = cfg.get("out_dir", ".")
    os.makedirs(out_dir, exist_ok=True)
    results, _ = compare(spec)
    for r in results:
        _report(r)
        write_csv(r, os.path.join(out_dir, f"{spec.name}_N{spec.N}_{r.spec.method}.csv"))
    if cfg.get("plot"):
        render_plot(results, cfg["plot"], title=f"{spec.name}, N={spec.N}")
    return EXIT_OK if all(r.converged for r in results) else EXIT_NOT_CONVERGED


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("a subcommand is required: run or compare")
        return _cmd_run(args) if args.command == "run" else _cmd_compare(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"unigrid: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
