"""Services: suite execution and report output."""

from hypobound.services.report_writer import emit_report, plot_margins
from hypobound.services.suite_service import run_suite

__all__ = ["emit_report", "plot_margins", "run_suite"]
