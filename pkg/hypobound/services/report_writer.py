"""
Report Writer - JSON, CSV and SVG Output

    report.json   the full SuiteReport (schema_version, plan_hash, plan, reports, summary, wall_time)
    checks.csv    one row per check, floats at 17 significant digits
    margins.svg   margin +/- k sigma against t, one panel per (inequality, variant),
                  one line per test function (SVG group id "series-<inequality>-<variant>-<testfn>")
"""

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib
from matplotlib.figure import Figure

from hypobound.core.errors import ReportIoError
from hypobound.core.reports import CheckReport, ReportFormat, SuiteReport, Verdict
from hypobound.logs.logger import get_logger

logger = get_logger(__name__)

FILE_NAMES = {ReportFormat.JSON: "report.json", ReportFormat.CSV: "checks.csv", ReportFormat.SVG: "margins.svg"}

CSV_COLUMNS = [
    "inequality_id",
    "variant",
    "t",
    "x",
    "y",
    "lhs",
    "lhs_stderr",
    "rhs",
    "rhs_stderr",
    "margin",
    "margin_stderr",
    "verdict",
    "seed",
]


# =============================================================================
# Formatting helpers
# =============================================================================


def _num(value: float | None) -> str:
    return "" if value is None else f"{value:.17g}"


def _vec(values: list[float] | None) -> str:
    return "" if values is None else " ".join(_num(v) for v in values)


def csv_row(report: CheckReport) -> dict[str, str]:
    ctx = report.context
    return {
        "inequality_id": report.inequality_id.value,
        "variant": report.variant.value,
        "t": _num(ctx.t),
        "x": _vec(ctx.x),
        "y": _vec(ctx.y),
        "lhs": _num(report.lhs.value if report.lhs else None),
        "lhs_stderr": _num(report.lhs.stderr if report.lhs else None),
        "rhs": _num(report.rhs.value if report.rhs else None),
        "rhs_stderr": _num(report.rhs.stderr if report.rhs else None),
        "margin": _num(report.margin),
        "margin_stderr": _num(report.margin_stderr),
        "verdict": report.verdict.value,
        "seed": "" if ctx.seed is None else str(ctx.seed),
    }


# =============================================================================
# Writers
# =============================================================================


def _write_json(report: SuiteReport, path: Path) -> None:
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")


def _write_csv(report: SuiteReport, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for check in report.reports:
            writer.writerow(csv_row(check))


def emit_report(report: SuiteReport, fmt: ReportFormat | str, out_dir: str | Path) -> Path:
    """
    Write one report format into out_dir.

    Returns:
        Path of the written file.

    Raises:
        ReportIoError: directory or file not writable.
    """
    fmt = ReportFormat(fmt)
    out_dir = Path(out_dir)
    path = out_dir / FILE_NAMES[fmt]
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if fmt is ReportFormat.JSON:
            _write_json(report, path)
        elif fmt is ReportFormat.CSV:
            _write_csv(report, path)
        else:
            plot_margins(report, path)
    except OSError as exc:
        raise ReportIoError(f"cannot write {path}: {exc.strerror or exc}") from exc
    logger.info("Wrote %s", path)
    return path


def load_report(path: str | Path) -> SuiteReport:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ReportIoError(f"cannot read report {path}: {exc.strerror or exc}") from exc
    try:
        return SuiteReport.model_validate_json(text)
    except ValueError as exc:
        raise ReportIoError(f"{path} is not a hypobound report: {exc}") from exc


# =============================================================================
# Margin plot
# =============================================================================


def series_id(check: CheckReport) -> str:
    return f"series-{check.inequality_id.value}-{check.variant.value}-{check.context.testfn or 'none'}"


def margin_series(report: SuiteReport) -> dict[tuple[str, str], dict[str, list[CheckReport]]]:
    """Non-skipped checks grouped by (inequality, variant) panel, then by series id, sorted by t."""
    panels: dict[tuple[str, str], dict[str, list[CheckReport]]] = defaultdict(lambda: defaultdict(list))
    for check in report.reports:
        if check.verdict is Verdict.SKIP or check.margin is None:
            continue
        panels[(check.inequality_id.value, check.variant.value)][series_id(check)].append(check)
    for series in panels.values():
        for checks in series.values():
            checks.sort(key=lambda c: c.context.t)
    return panels


def plot_margins(report: SuiteReport, path: str | Path, sigma_level: float | None = None) -> Path:
    """Margin +/- k * margin_stderr against t; k defaults to the plan's sigma_level."""
    if sigma_level is None:
        sigma_level = float(report.plan.get("mc", {}).get("sigma_level", 3.0))
    panels = margin_series(report)
    rows = max(1, len(panels))

    fig = Figure(figsize=(7.0, 2.6 * rows))
    axes = fig.subplots(rows, 1, squeeze=False)[:, 0]
    if not panels:
        axes[0].text(0.5, 0.5, "no checks", ha="center", va="center")
        axes[0].set_axis_off()

    for ax, ((inequality, variant), series) in zip(axes, sorted(panels.items())):
        for gid, checks in sorted(series.items()):
            ts = [c.context.t for c in checks]
            margins = [c.margin for c in checks]
            bands = [sigma_level * (c.margin_stderr or 0.0) for c in checks]
            (line,) = ax.plot(ts, margins, marker="o", markersize=3, label=checks[0].context.testfn or inequality)
            line.set_gid(gid)
            ax.fill_between(
                ts,
                [m - b for m, b in zip(margins, bands)],
                [m + b for m, b in zip(margins, bands)],
                color=line.get_color(),
                alpha=0.2,
                linewidth=0,
            )
        ax.axhline(0.0, color="black", linewidth=0.8)
        ax.set_title(f"{inequality} ({variant})")
        ax.set_xlabel("t")
        ax.set_ylabel("rhs - lhs")
        ax.legend(fontsize="small")

    fig.tight_layout()
    path = Path(path)
    # fixed salt: element ids repeat across runs
    with matplotlib.rc_context({"svg.hashsalt": "hypobound"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path
