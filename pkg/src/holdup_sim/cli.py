"""Command-line entry points: run a sweep, verify the closed forms, summarize outputs."""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

from .benchmark import check_rows
from .stats import weighted_gamma_mean
from .sweep import ConfigError, SweepSpec, execute, load_config, read_summary

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _cmd_run(args) -> int:
    spec = load_config(args.config) if args.config else SweepSpec()
    if args.runs is not None:
        spec.runs = args.runs
    if args.seed is not None:
        spec.master_seed = args.seed
    if args.out is not None:
        spec.output_dir = Path(args.out)
    return execute(spec, jobs=args.jobs, trace=args.trace)


def _cmd_verify_tables(args) -> int:
    checks = check_rows()
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        line = f"{status}  {check.label}  max|err|={check.max_abs_error:.5f}"
        if check.mismatches:
            line += "  " + "; ".join(check.mismatches)
        print(line)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} rows match within 0.005")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def _cmd_summarize(args) -> int:
    path = Path(args.summary)
    if path.is_dir():
        path = path / "summary.csv"
    rows = read_summary(path)
    if not rows:
        print("no rows found")
        return EXIT_RUNTIME
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["lambda_s"], row["sd_theta"], row["policy"]), []).append(row)
    for (lam_s, sd, policy), group in sorted(groups.items()):
        verdicts = Counter(r["verdict"] for r in group)
        wgm = weighted_gamma_mean((r["gamma_share"], r["bpi"], r["verdict"]) for r in group)
        best = max(group, key=lambda r: r["profit_mean"])
        print(f"lambda_s={lam_s:.4f} sd={sd:g} policy={policy}: {len(group)} cells")
        print(f"  verdicts: {dict(verdicts)}")
        print(
            "  weighted gamma mean over fully significant cells: "
            + (f"{wgm:.4f}" if wgm is not None else "n/a (none significant)")
        )
        print(
            f"  best cell: gamma={best['gamma_share']:.2f} discount={best['discount']:.2f} "
            f"profit={best['profit_mean']:.3f} fpi={best['fpi']:.4f}"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holdup-sim",
        description=(
            "Agent-based simulator for specific investments under negotiated "
            "transfer pricing, with closed-form benchmarks and sweep analysis."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a sweep described by a YAML config")
    run.add_argument("config", nargs="?", default=None, help="YAML config path (defaults apply if omitted)")
    run.add_argument("--runs", type=int, default=None, help="override runs per cell")
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--jobs", type=int, default=None, help="worker processes for the batch")
    run.add_argument("--trace", action="store_true", help="write a per-step trace CSV of run 0 per cell")
    run.add_argument("--out", default=None, help="output directory (overrides config)")
    run.set_defaults(func=_cmd_run)

    verify = sub.add_parser("verify-tables", help="check the closed forms against the reference grid")
    verify.set_defaults(func=_cmd_verify_tables)

    summ = sub.add_parser("summarize", help="summarize a sweep's summary.csv")
    summ.add_argument("summary", help="summary.csv path or the sweep output directory")
    summ.set_defaults(func=_cmd_summarize)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, FileNotFoundError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    raise SystemExit(main())
