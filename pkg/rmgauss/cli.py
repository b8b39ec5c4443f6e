"""
Command-line interface.

Usage:
  rmgauss run <config.json> [--sweep seeds=K|grids=n1,n2] [--out DIR] [--ledger URL]
  rmgauss bvp <config.json>
  rmgauss spectrum <config.json> [--at bvp|zero|quadratic|file:<path>] [-k K]
  rmgauss compare <A> <B> [--tol-h1 R] [--tol-l2 R] [--sigma-factor F]  (defaults: run A's compare block)

Examples:
  python -m rmgauss run configs/scalar_quartic.json -v
  python -m rmgauss run configs/path_quartic.json --sweep grids=99,199 --out runs/quartic
  python -m rmgauss spectrum configs/path_dblwell_spectrum.json --at quadratic
  python -m rmgauss compare runs/quartic/run_0 runs/quartic/run_1
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Optional

from . import __version__, config
from .compare import COMPARE_REPORT_FILE, compare_runs, write_compare_report
from .errors import ConfigError, RmGaussError
from .experiment import ExperimentResult, run_experiment
from .ledger import RunLedger
from .models import ExperimentConfig, Pipeline, load_config
from .sweep import SWEEP_SUMMARY_FILE, parse_sweep, run_sweep

logger = logging.getLogger(__name__)

STATUS_ICONS = {0: "✅", 1: "❌", 2: "❌", 3: "🌪️", 4: "⚠️"}


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default: config output.directory or "
                                      f"$RMGAUSS_OUTPUT_DIR/<name>, currently {config.OUTPUT_DIR})")
    common.add_argument("--ledger", help="record runs in a SQL ledger, e.g. sqlite:///runs.db")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="rmgauss",
        description="Best-fit Gaussian means by truncated Robbins-Monro, with BVP and spectrum oracles",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run the pipelines listed in the config")
    run.add_argument("config", help="experiment config (JSON)")
    run.add_argument("--sweep", help="seeds=K or grids=n1,n2 (runs members concurrently)")
    run.add_argument("--workers", type=int, default=config.DEFAULT_SWEEP_WORKERS,
                     help="worker threads for --sweep")

    bvp = sub.add_parser("bvp", parents=[common], help="solve the Euler-Lagrange boundary-value problem")
    bvp.add_argument("config")
    bvp.add_argument("--sweep", help="grids=n1,n2")
    bvp.add_argument("--workers", type=int, default=config.DEFAULT_SWEEP_WORKERS)

    spectrum = sub.add_parser("spectrum", parents=[common], help="low spectrum of the second variation")
    spectrum.add_argument("config")
    spectrum.add_argument("--at", help="bvp | zero | quadratic | file:<path.csv> (default from config)")
    spectrum.add_argument("-k", type=int, help="number of eigenvalues")

    compare = sub.add_parser("compare", parents=[common], help="compare two runs")
    compare.add_argument("a", help="run directory or path CSV")
    compare.add_argument("b", help="run directory or path CSV")
    # unset tolerances fall back to the compare block recorded with run A
    compare.add_argument("--tol-h1", type=float)
    compare.add_argument("--tol-l2", type=float)
    compare.add_argument("--sigma-factor", type=float)
    return parser


def resolve_output_dir(cfg: ExperimentConfig, out: Optional[str]) -> str:
    if out:
        return out
    if cfg.output.directory:
        return cfg.output.directory
    return os.path.join(config.OUTPUT_DIR, cfg.name)


def _print_result(result: ExperimentResult) -> None:
    icon = STATUS_ICONS.get(result.exit_code, "❌")
    summary = result.summary
    print(f"{icon} {summary['name']}: {result.status.value} (exit {result.exit_code})")
    rm = summary.get("rm")
    if rm:
        line = f"   RM: sigma_total={rm['sigma_total']} final_norm={rm['final_norm']:.6g}"
        if rm.get("final_x") is not None:
            line += f" final_x={rm['final_x']:.6g}"
        print(line)
    bvp = summary.get("bvp")
    if bvp:
        print(f"   BVP: converged={bvp['converged']} newton_iters={bvp['newton_iters']} "
              f"|dx|_H1={bvp['residual_h1']:.3e}")
    spec = summary.get("spectrum")
    if spec:
        print(f"   Spectrum at {spec['at']}: min eigenvalue={spec['min_eigenvalue']:.6g} "
              f"negative={spec['negative_count']} min q={spec['min_q']:.6g} theta={spec['theta_bound']:.6g}")
    if "error" in summary:
        print(f"   {summary['error']}")
    print(f"📁 {result.output_dir}")


def _pipelines(command: str, cfg: ExperimentConfig) -> List[Pipeline]:
    if command == "bvp":
        return [Pipeline.BVP]
    if command == "spectrum":
        return [Pipeline.SPECTRUM]
    return list(cfg.pipeline)


def _run_config(args, ledger: Optional[RunLedger]) -> int:
    cfg = load_config(args.config)
    out = resolve_output_dir(cfg, args.out)
    pipelines = _pipelines(args.command, cfg)
    if args.command != "run" and cfg.problem.mode != "path":
        raise ConfigError(f"{args.command} needs a path problem")
    config.validate_output_dir(out)

    print(f"🎯 {cfg.name}: {', '.join(p.value for p in pipelines)}")
    sweep_text = getattr(args, "sweep", None)
    if sweep_text:
        spec = parse_sweep(sweep_text)
        exit_code, summary = run_sweep(cfg, spec, out, pipelines, None, ledger, args.command, args.workers)
        for row in summary["runs"]:
            icon = STATUS_ICONS.get(row["exit_code"], "❌")
            print(f"{icon} {row['run']}: {row['status']} sigma_total={row['sigma_total']} "
                  f"final_norm={row['final_norm']}")
        print(f"📁 {os.path.join(out, SWEEP_SUMMARY_FILE)}")
        return exit_code

    result = run_experiment(
        cfg, out, pipelines,
        spectrum_at=getattr(args, "at", None), spectrum_k=getattr(args, "k", None),
        ledger=ledger, command=args.command,
    )
    _print_result(result)
    return result.exit_code


def _compare(args) -> int:
    report = compare_runs(args.a, args.b, args.tol_h1, args.tol_l2, args.sigma_factor)
    out = args.out or (args.a if os.path.isdir(args.a) else os.path.dirname(os.path.abspath(args.a)))
    path = write_compare_report(os.path.join(out, COMPARE_REPORT_FILE), report)
    icon = "✅" if report.passed else "❌"
    print(f"{icon} H1 distance {report.h1_distance:.6g} (tol {report.tol_h1:g}), "
          f"L2 distance {report.l2_distance:.6g}")
    if report.sigma_ratio is not None:
        print(f"   sigma {report.sigma_a} vs {report.sigma_b}, ratio {report.sigma_ratio:.3g} "
              f"(max {report.sigma_factor:g})")
    print(f"📁 {path}")
    return 0 if report.passed else 1


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config.setup_logging(args.verbose)
    try:
        ledger = RunLedger(args.ledger) if args.ledger else None
        if args.command == "compare":
            return _compare(args)
        return _run_config(args, ledger)
    except ConfigError as e:
        print(f"❌ {e}", file=sys.stderr)
        for line in e.details:
            print(f"   {line}", file=sys.stderr)
        return e.exit_code
    except RmGaussError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\n⏹️ interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
