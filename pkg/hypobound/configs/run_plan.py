"""
Run Plans - TOML Check Suites

A run plan names one model, a Monte Carlo budget, test functions, evaluation
points and the inequality suites to run over them:

    [model]        name, r, dims, A0 and/or sigma (row-major), blocks
    [mc]           n, batch, seed (required), sigma_level
    [[testfns]]    id, kind, params
    [[grid]]       t, x, optional y
    [[suites]]     inequality, variants, alphas, powers, c_bound, testfns, exact, direction, eps
    [output]       dir, formats

Plans are read from TOML, or from JSON (a plan echo, or a whole JSON report
whose `plan` entry is taken). Parse errors carry line and column; validation
errors carry the dotted field path.
"""

import hashlib
import json
import re
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # Python 3.10: API-identical backport
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from hypobound.core.errors import ConfigParseError, ConfigValidationError, HypoboundError
from hypobound.core.estimator import McConfig
from hypobound.core.model import ModelStructure, validate_structure
from hypobound.core.reports import InequalityId, ReportFormat, Variant
from hypobound.core.testfns import TestFnKind, TestFunction, make_testfn
from hypobound.logs.logger import get_logger

logger = get_logger(__name__)

Matrix = list[float] | list[list[float]]
ALL = "all"


# =============================================================================
# Sections
# =============================================================================


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSection(_Section):
    name: str = "model"
    r: int
    dims: list[int]
    A0: Matrix | None = None
    sigma: Matrix | None = None
    blocks: list[Matrix]


class TestFnSection(_Section):
    __test__ = False

    id: str
    kind: TestFnKind
    params: dict[str, Any] = Field(default_factory=dict)


class GridPoint(_Section):
    t: float = Field(ge=0)
    x: list[float]
    y: list[float] | None = None


class SuiteSection(_Section):
    inequality: InequalityId | Literal["all"]
    variants: list[Variant] = Field(default_factory=list)
    alphas: list[list[float]] = Field(default_factory=list)
    powers: list[float] = Field(default_factory=lambda: [2.0])
    c_bound: float | None = None
    testfns: list[str] | None = None
    exact: bool = False
    direction: list[float] | None = None
    eps: float = Field(default=1e-4, gt=0)


class OutputSection(_Section):
    dir: str = "hypobound-out"
    formats: list[ReportFormat] = Field(default_factory=lambda: [ReportFormat.JSON, ReportFormat.CSV])


class RunPlan(_Section):
    model: ModelSection
    mc: McConfig
    testfns: list[TestFnSection] = Field(default_factory=list)
    grid: list[GridPoint] = Field(default_factory=list)
    suites: list[SuiteSection] = Field(default_factory=list)
    output: OutputSection = Field(default_factory=OutputSection)
    jobs: int | None = Field(default=None, ge=1)

    def structure(self) -> ModelStructure:
        return validate_structure(self.model.model_dump(exclude_none=True))

    def test_functions(self) -> dict[str, TestFunction]:
        return {section.id: make_testfn(section.kind, section.params) for section in self.testfns}

    def echo(self) -> dict[str, Any]:
        """Plain-data copy that `plan_from_dict` turns back into an equal plan."""
        return self.model_dump(mode="json")


# =============================================================================
# Loading
# =============================================================================


def config_hash(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def plan_hash(plan: RunPlan) -> str:
    """Hash of the canonical JSON echo, for plans built in code."""
    return config_hash(json.dumps(plan.echo(), sort_keys=True).encode("utf-8"))


def _field_path(loc: tuple) -> str:
    path = ""
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path or "plan"


def _cross_check(plan: RunPlan) -> None:
    try:
        model = plan.structure()
    except HypoboundError as exc:
        raise ConfigValidationError("model", f"{type(exc).__name__}: {exc}") from exc

    ids = [section.id for section in plan.testfns]
    if len(set(ids)) != len(ids):
        raise ConfigValidationError("testfns", f"duplicate test function ids in {ids}")
    for i, section in enumerate(plan.testfns):
        try:
            f = make_testfn(section.kind, section.params)
        except HypoboundError as exc:
            raise ConfigValidationError(f"testfns[{i}].params", f"{type(exc).__name__}: {exc}") from exc
        if f.dim != model.N:
            raise ConfigValidationError(f"testfns[{i}].params", f"function has dimension {f.dim}, model has N = {model.N}")

    for i, point in enumerate(plan.grid):
        for name in ("x", "y"):
            vec = getattr(point, name)
            if vec is not None and len(vec) != model.N:
                raise ConfigValidationError(f"grid[{i}].{name}", f"has length {len(vec)}, model has N = {model.N}")

    for i, suite in enumerate(plan.suites):
        for ref in suite.testfns or []:
            if ref not in ids:
                raise ConfigValidationError(f"suites[{i}].testfns", f"unknown test function id {ref!r}")
        if suite.direction is not None and len(suite.direction) != model.dims[0]:
            raise ConfigValidationError(
                f"suites[{i}].direction", f"has length {len(suite.direction)}, first block has m0 = {model.dims[0]}"
            )


def plan_from_dict(data: dict[str, Any]) -> RunPlan:
    """
    Validate plain plan data.

    Raises:
        ConfigValidationError: first offending field with the reason.
    """
    try:
        plan = RunPlan.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigValidationError(_field_path(first["loc"]), first["msg"]) from exc
    _cross_check(plan)
    return plan


_TOML_POSITION = re.compile(r"\(at line (\d+), column (\d+)\)")


def _load_bytes(raw: bytes, suffix: str) -> dict[str, Any]:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigParseError(f"plan is not UTF-8 text: {exc}") from exc

    if suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigParseError(exc.msg, exc.lineno, exc.colno) from exc
        if isinstance(data, dict) and "schema_version" in data and "plan" in data:
            data = data["plan"]
    else:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            line, column = getattr(exc, "lineno", None), getattr(exc, "colno", None)
            match = _TOML_POSITION.search(str(exc))
            if line is None and match:
                line, column = int(match.group(1)), int(match.group(2))
            message = getattr(exc, "msg", None) or _TOML_POSITION.sub("", str(exc)).strip()
            raise ConfigParseError(message, line, column) from exc

    if not isinstance(data, dict):
        raise ConfigParseError("plan must be a table of sections")
    return data


def parse_config(path: str | Path) -> RunPlan:
    """
    Read and validate a plan file (.toml, or .json plan echo / report).

    Raises:
        ConfigParseError: unreadable or malformed file (line/column when known)
        ConfigValidationError: well-formed but invalid plan
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigParseError(f"cannot read plan {path}: {exc.strerror or exc}") from exc
    plan = plan_from_dict(_load_bytes(raw, path.suffix.lower()))
    logger.info(
        "Loaded plan %s: model %s, %d test functions, %d grid points, %d suites",
        path,
        plan.model.name,
        len(plan.testfns),
        len(plan.grid),
        len(plan.suites),
    )
    return plan


def read_config_hash(path: str | Path) -> str:
    try:
        return config_hash(Path(path).read_bytes())
    except OSError as exc:
        raise ConfigParseError(f"cannot read plan {path}: {exc.strerror or exc}") from exc
