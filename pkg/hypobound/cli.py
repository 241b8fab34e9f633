"""
hypobound command line

USAGE:
    hypobound validate --config plan.toml
    hypobound covariance --config plan.toml --t 2.0
    hypobound run --config plan.toml [--out DIR] [--formats json,csv,svg] [--sigma K] [--jobs N]
    hypobound plot --report out/report.json [--out DIR] [--sigma K]

EXIT CODES:
    0  every check passed (skips allowed)
    1  at least one check failed
    2  plan could not be parsed or validated
    3  report files could not be written or read
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from hypobound.configs.app_config import get_config
from hypobound.configs.run_plan import RunPlan, parse_config, read_config_hash
from hypobound.core.errors import ConfigParseError, ConfigValidationError, ReportIoError
from hypobound.core.matfun import covariance_paper, covariance_sde, propagator
from hypobound.core.reports import ReportFormat
from hypobound.logs.logger import get_logger, setup_logging
from hypobound.services.report_writer import emit_report, load_report, plot_margins
from hypobound.services.suite_service import run_suite

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def _formats(value: str) -> list[ReportFormat]:
    try:
        return [ReportFormat(item.strip()) for item in value.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"formats must be drawn from json, csv, svg: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypobound",
        description="Exact Kolmogorov-type diffusions and numerical checks of their gradient bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", help="parse and validate a plan")
    validate.add_argument("--config", type=Path, required=True, help="plan file (.toml or .json)")

    covariance = sub.add_parser("covariance", help="print C(t), C+(t) and E(t) for the plan's model")
    covariance.add_argument("--config", type=Path, required=True, help="plan file (.toml or .json)")
    covariance.add_argument("--t", type=float, required=True, help="time at which to evaluate")

    run = sub.add_parser("run", help="run every check of a plan and write reports")
    run.add_argument("--config", type=Path, required=True, help="plan file (.toml or .json)")
    run.add_argument("--out", type=Path, default=None, help="output directory (default: plan output.dir)")
    run.add_argument("--formats", type=_formats, default=None, help="comma-separated subset of json,csv,svg")
    run.add_argument("--sigma", type=float, default=None, help="k for k-sigma Monte Carlo verdicts")
    run.add_argument("--jobs", type=int, default=None, help="worker threads (overrides HYPOBOUND_JOBS)")

    plot = sub.add_parser("plot", help="draw margins.svg from an existing JSON report")
    plot.add_argument("--report", type=Path, required=True, help="report.json written by `run`")
    plot.add_argument("--out", type=Path, default=None, help="output directory (default: next to the report)")
    plot.add_argument("--sigma", type=float, default=None, help="band width k (default: the plan's sigma_level)")
    return parser


# =============================================================================
# Commands
# =============================================================================


def cmd_validate(args: argparse.Namespace) -> int:
    plan = parse_config(args.config)
    model = plan.structure()
    print(f"{args.config}: valid plan for {model!r} (N = {model.N}), {len(plan.suites)} suite(s)")
    return EXIT_OK


def _print_blocks(title: str, matrix: np.ndarray, slices: list[slice]) -> None:
    print(title)
    for k2, rows in enumerate(slices):
        for k1, cols in enumerate(slices):
            block = np.array2string(matrix[rows, cols], precision=12, separator=", ")
            print(f"  block ({k2}, {k1}):\n    " + block.replace("\n", "\n    "))


def cmd_covariance(args: argparse.Namespace) -> int:
    plan = parse_config(args.config)
    model = plan.structure()
    t = args.t
    slices = model.block_slices
    print(f"model {model.name}, t = {t!r}")
    _print_blocks("C(t):", covariance_paper(model)(t), slices)
    _print_blocks("C+(t):", covariance_sde(model)(t), slices)
    _print_blocks("E(t):", propagator(model, -1)(t), slices)
    return EXIT_OK


def _run_formats(args: argparse.Namespace, plan: RunPlan) -> list[ReportFormat]:
    if args.formats:
        return args.formats
    if "formats" in plan.output.model_fields_set:
        return plan.output.formats
    return [ReportFormat(item) for item in get_config().default_formats]


def cmd_run(args: argparse.Namespace) -> int:
    plan = parse_config(args.config)
    report = run_suite(plan, jobs=args.jobs, sigma_level=args.sigma, config_digest=read_config_hash(args.config))
    out_dir = args.out or Path(plan.output.dir)
    for fmt in _run_formats(args, plan):
        emit_report(report, fmt, out_dir)
    summary = report.summary
    print(f"pass {summary['pass']}  fail {summary['fail']}  skip {summary['skip']}  ({report.wall_time:.2f}s)")
    return EXIT_FAILED if report.any_failed else EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    report = load_report(args.report)
    out_dir = args.out or args.report.parent
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = plot_margins(report, out_dir / "margins.svg", sigma_level=args.sigma)
    except OSError as exc:
        raise ReportIoError(f"cannot write {out_dir / 'margins.svg'}: {exc.strerror or exc}") from exc
    print(path)
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "covariance": cmd_covariance, "run": cmd_run, "plot": cmd_plot}


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    setup_logging()
    try:
        get_config().validate()
    except ValueError as exc:
        logger.error("Invalid environment: %s", exc)
        return EXIT_CONFIG

    try:
        return COMMANDS[args.command](args)
    except (ConfigParseError, ConfigValidationError) as exc:
        logger.error("Plan error: %s", exc)
        return EXIT_CONFIG
    except ReportIoError as exc:
        logger.error("Report error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
