"""
Check and Suite Reports

Every inequality check is reported in the orientation "lhs <= rhs", so the
margin rhs - lhs is nonnegative whenever the inequality holds:

    CheckReport  one inequality at one (model, f, t, x[, y]) with its verdict
    SuiteReport  all checks of a plan, the plan echo and pass/fail/skip tallies

Both serialize through pydantic; the JSON layout is versioned by
`schema_version`.
"""

from enum import Enum
from typing import Any

from pydantic import BaseModel, Field, model_validator

from hypobound.core.estimator import Estimate

SCHEMA_VERSION = 1


class InequalityId(str, Enum):
    BE = "be"
    LOGBE = "logbe"
    POINCARE = "poincare"
    POINCARE_BLOCKWISE = "poincare_blockwise"
    LSI = "lsi"
    WANG_HARNACK = "wang_harnack"
    HAMILTON = "hamilton"
    HARNACK_POWER = "harnack_power"
    SCALING = "scaling"
    DIRECTIONAL = "directional"


class Variant(str, Enum):
    GENERAL = "general"
    RIGHT = "right"
    REVERSE = "reverse"


class ReportFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    SVG = "svg"


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIP = "skip"


# =============================================================================
# Check reports
# =============================================================================


class CheckContext(BaseModel):
    """Everything needed to rerun one check bit-for-bit."""

    model: str
    testfn: str | None = None
    t: float
    x: list[float] | None = None
    y: list[float] | None = None
    alpha: list[float] | None = None
    power: float | None = None
    c_bound: float | None = None
    direction: list[float] | None = None
    eps: float | None = None
    seed: int | None = None
    master_seed: int | None = None
    n: int | None = None
    batch: int | None = None
    sigma_level: float | None = None
    exact: bool = False


class CheckReport(BaseModel):
    inequality_id: InequalityId
    variant: Variant
    lhs: Estimate | None = None
    rhs: Estimate | None = None
    margin: float | None = None
    margin_stderr: float | None = None
    verdict: Verdict
    context: CheckContext
    notes: list[str] = Field(default_factory=list)
    reason: str | None = None

    @classmethod
    def skipped(
        cls, inequality_id: InequalityId, variant: Variant, context: CheckContext, reason: str
    ) -> "CheckReport":
        return cls(inequality_id=inequality_id, variant=variant, verdict=Verdict.SKIP, context=context, reason=reason)


# =============================================================================
# Suite report
# =============================================================================


def tally(reports: list[CheckReport]) -> dict[str, int]:
    counts = {verdict.value: 0 for verdict in Verdict}
    for report in reports:
        counts[report.verdict.value] += 1
    return counts


class SuiteReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    plan_hash: str
    plan: dict[str, Any]
    reports: list[CheckReport] = Field(default_factory=list)
    summary: dict[str, int] = Field(default_factory=dict)
    wall_time: float = 0.0

    @model_validator(mode="after")
    def _summary_matches(self) -> "SuiteReport":
        counts = tally(self.reports)
        if not self.summary:
            self.summary = counts
        elif self.summary != counts:
            raise ValueError(f"summary {self.summary} does not match report tallies {counts}")
        return self

    @property
    def any_failed(self) -> bool:
        return self.summary.get(Verdict.FAIL.value, 0) > 0
