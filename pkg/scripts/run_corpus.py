#!/usr/bin/env python
"""
Randomized Theorem Corpus

Runs `hypobound.services.corpus_service.run_corpus` and reports the failure
rate. Exits 1 when 1% or more of the checks fail; a check that fails under
three independent master seeds points at a defect.

USAGE:
    python scripts/run_corpus.py
    python scripts/run_corpus.py --scenarios 300 --n 50000 --seed 11 --jobs 4
    python scripts/run_corpus.py --out corpus/
"""

import argparse
import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from hypobound.core.reports import SuiteReport  # noqa: E402
from hypobound.logs.logger import get_logger, setup_logging  # noqa: E402
from hypobound.services.corpus_service import run_corpus  # noqa: E402
from hypobound.services.report_writer import emit_report  # noqa: E402

setup_logging()
logger = get_logger(__name__)


def main():
    """Main entry point."""
    parser = argparse.ArgumentParser(description="Run every theorem-backed check over a randomized corpus.")
    parser.add_argument("--scenarios", type=int, default=200, help="number of random scenarios (default: 200)")
    parser.add_argument("--n", type=int, default=100_000, help="samples per side (default: 100000)")
    parser.add_argument("--seed", type=int, default=2024, help="master seed (default: 2024)")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads (default: 1)")
    parser.add_argument("--out", type=Path, default=None, help="directory for report.json and checks.csv")
    args = parser.parse_args()

    result = run_corpus(args.scenarios, args.n, args.seed, args.jobs)
    for report in result.failures:
        logger.warning(
            "FAIL %s/%s %s t=%.3g margin=%.3g +/- %.3g",
            report.inequality_id.value,
            report.variant.value,
            report.context.testfn,
            report.context.t,
            report.margin,
            report.margin_stderr,
        )

    if args.out is not None:
        suite = SuiteReport(
            plan_hash="corpus",
            plan={"scenarios": args.scenarios, "n": args.n, "seed": args.seed},
            reports=result.reports,
        )
        emit_report(suite, "json", args.out)
        emit_report(suite, "csv", args.out)

    counts = result.counts
    print(
        f"checks {len(result.reports)}  pass {counts.get('pass', 0)}  fail {len(result.failures)}  "
        f"errors {result.errors}  rate {result.fail_rate:.3%}"
    )
    sys.exit(0 if result.acceptable else 1)


if __name__ == "__main__":
    main()
