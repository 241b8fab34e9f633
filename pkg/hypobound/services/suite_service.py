"""
Suite Service - Plan Execution

Expands a RunPlan into individual checks (suite x inequality x variant x grid
point x test function, in declaration order), runs them on a thread pool and
assembles the SuiteReport in declaration order.

Each check gets its own seed, derived from the plan's master seed and the
check's position in the expansion, so results do not depend on the worker
count or on scheduling. A HypoboundError raised by one check becomes a skip
report for that check; the rest of the suite still runs.
"""

import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from hypobound.configs.app_config import get_config
from hypobound.configs.run_plan import ALL, GridPoint, RunPlan, SuiteSection, plan_hash
from hypobound.core.coupling import CouplingSpec
from hypobound.core.errors import HypoboundError, MissingHypothesis
from hypobound.core.estimator import McConfig
from hypobound.core.inequalities import (
    check_be,
    check_directional,
    check_hamilton,
    check_harnack_power,
    check_logbe,
    check_lsi,
    check_poincare,
    check_poincare_blockwise,
    check_scaling,
    check_wang_harnack,
)
from hypobound.core.model import ModelStructure
from hypobound.core.reports import CheckContext, CheckReport, InequalityId, SuiteReport, Variant
from hypobound.core.testfns import TestFunction
from hypobound.logs.logger import get_logger

logger = get_logger(__name__)

PAIRED_VARIANTS = (Variant.RIGHT, Variant.REVERSE)
ALPHA_FAMILIES = {InequalityId.BE, InequalityId.LOGBE, InequalityId.DIRECTIONAL}
NEEDS_Y = {InequalityId.WANG_HARNACK, InequalityId.HARNACK_POWER}


@dataclass
class CheckTask:
    """One scheduled check: what to run and how to label it if it is skipped."""

    index: int
    inequality_id: InequalityId
    variant: Variant
    testfn: str | None
    point: GridPoint
    run: Callable[[McConfig], CheckReport] = field(repr=False)
    extras: dict = field(default_factory=dict)


# =============================================================================
# Expansion
# =============================================================================


def derive_seed(master_seed: int, index: int) -> int:
    """Seed of the check at position `index`, independent of execution order."""
    return int(np.random.SeedSequence(master_seed, spawn_key=(index,)).generate_state(1)[0])


def _kinds(suite: SuiteSection) -> list[InequalityId]:
    return list(InequalityId) if suite.inequality == ALL else [InequalityId(suite.inequality)]


def _variants(kind: InequalityId, suite: SuiteSection) -> list[tuple[Variant, list[float] | None]]:
    """(variant, alpha) pairs; general alpha families get one entry per declared alpha."""
    if kind in ALPHA_FAMILIES:
        pairs = [(v, None) for v in PAIRED_VARIANTS] + [(Variant.GENERAL, a) for a in suite.alphas]
    elif kind in (InequalityId.POINCARE, InequalityId.POINCARE_BLOCKWISE, InequalityId.LSI):
        pairs = [(v, None) for v in PAIRED_VARIANTS]
    else:
        return [(Variant.GENERAL, None)]
    if suite.variants:
        pairs = [(v, a) for v, a in pairs if v in suite.variants]
    return pairs


def _c_bound(suite: SuiteSection, f: TestFunction) -> float:
    if suite.c_bound is not None:
        return suite.c_bound
    if f.props.upper_bound is None:
        raise MissingHypothesis(f"no c_bound given and {f!r} declares no upper bound")
    return f.props.upper_bound


def _coupling(model: ModelStructure, suite: SuiteSection, variant: Variant, alpha, t: float) -> CouplingSpec:
    v = np.eye(model.dims[0])[0] if suite.direction is None else np.asarray(suite.direction, dtype=float)
    if variant is Variant.RIGHT:
        return CouplingSpec.right(model, v, suite.eps)
    if variant is Variant.REVERSE:
        return CouplingSpec.reverse(model, t, v, suite.eps)
    return CouplingSpec(alpha=tuple(alpha), v=v, eps=suite.eps)


def _runner(
    kind: InequalityId,
    variant: Variant,
    alpha,
    model: ModelStructure,
    f: TestFunction | None,
    point: GridPoint,
    suite: SuiteSection,
    power: float | None,
) -> Callable[[McConfig], CheckReport]:
    t, x, y = point.t, point.x, point.y
    match kind:
        case InequalityId.BE:
            return lambda mc: check_be(model, f, t, x, variant, alpha, mc)
        case InequalityId.LOGBE:
            return lambda mc: check_logbe(model, f, t, x, variant, alpha, mc)
        case InequalityId.POINCARE:
            return lambda mc: check_poincare(model, f, t, x, variant, mc, exact=suite.exact)
        case InequalityId.POINCARE_BLOCKWISE:
            return lambda mc: check_poincare_blockwise(model, f, t, x, variant, mc)
        case InequalityId.LSI:
            return lambda mc: check_lsi(model, f, t, x, variant, mc)
        case InequalityId.WANG_HARNACK:
            return lambda mc: check_wang_harnack(model, f, t, x, y, power, mc)
        case InequalityId.HAMILTON:
            return lambda mc: check_hamilton(model, f, _c_bound(suite, f), t, x, mc)
        case InequalityId.HARNACK_POWER:
            return lambda mc: check_harnack_power(model, f, _c_bound(suite, f), t, x, y, power, mc)
        case InequalityId.SCALING:
            return lambda mc: check_scaling(model, t)
        case InequalityId.DIRECTIONAL:
            return lambda mc: check_directional(
                model, f, t, x, _coupling(model, suite, variant, alpha, t), mc, variant=variant
            )
    raise ValueError(f"unknown inequality {kind}")


def expand_plan(plan: RunPlan) -> list[CheckTask]:
    """Every check of the plan in declaration order."""
    model = plan.structure()
    functions = plan.test_functions()
    tasks: list[CheckTask] = []

    for suite in plan.suites:
        fn_ids = suite.testfns if suite.testfns is not None else list(functions)
        for kind in _kinds(suite):
            if kind is InequalityId.SCALING:
                for t in dict.fromkeys(p.t for p in plan.grid):
                    point = GridPoint(t=t, x=[0.0] * model.N)
                    run = _runner(kind, Variant.GENERAL, None, model, None, point, suite, None)
                    tasks.append(CheckTask(len(tasks), kind, Variant.GENERAL, None, point, run))
                continue
            powers = suite.powers if kind in NEEDS_Y else [None]
            for variant, alpha in _variants(kind, suite):
                for point in plan.grid:
                    if kind in NEEDS_Y and point.y is None:
                        logger.debug("No y at grid point t=%g; %s not scheduled", point.t, kind.value)
                        continue
                    for fn_id in fn_ids:
                        for power in powers:
                            run = _runner(kind, variant, alpha, model, functions[fn_id], point, suite, power)
                            extras = {"alpha": alpha, "power": power, "exact": suite.exact}
                            tasks.append(CheckTask(len(tasks), kind, variant, fn_id, point, run, extras))
    return tasks


# =============================================================================
# Execution
# =============================================================================


def _skip_context(task: CheckTask, model_name: str, mc: McConfig) -> CheckContext:
    return CheckContext(
        model=model_name,
        testfn=task.testfn,
        t=task.point.t,
        x=task.point.x,
        y=task.point.y,
        alpha=task.extras.get("alpha"),
        power=task.extras.get("power"),
        seed=mc.seed,
        n=mc.n,
        batch=mc.batch,
        sigma_level=mc.sigma_level,
    )


def _execute(task: CheckTask, mc: McConfig, model_name: str) -> CheckReport:
    seed = derive_seed(mc.seed, task.index)
    task_mc = mc.model_copy(update={"seed": seed})
    try:
        report = task.run(task_mc)
    except (HypoboundError, ValueError) as exc:
        reason = f"{type(exc).__name__}: {exc}"
        logger.warning("Skipping %s/%s (%s): %s", task.inequality_id.value, task.variant.value, task.testfn, reason)
        report = CheckReport.skipped(task.inequality_id, task.variant, _skip_context(task, model_name, task_mc), reason)
    report.context.testfn = task.testfn
    report.context.master_seed = mc.seed
    if report.context.seed is None and task.inequality_id is not InequalityId.SCALING:
        report.context.seed = seed
    return report


def resolve_jobs(cli_jobs: int | None, plan: RunPlan) -> int:
    """--jobs beats HYPOBOUND_JOBS, which beats the plan."""
    for jobs in (cli_jobs, get_config().jobs, plan.jobs):
        if jobs is not None:
            return max(1, int(jobs))
    return 1


def run_suite(
    plan: RunPlan, jobs: int | None = None, sigma_level: float | None = None, config_digest: str | None = None
) -> SuiteReport:
    """
    Run every check of the plan.

    Args:
        plan: validated plan.
        jobs: worker threads (see `resolve_jobs`).
        sigma_level: overrides the plan's k for Monte Carlo verdicts.
        config_digest: sha256 of the plan file bytes; defaults to the hash of the plan echo.
    """
    started = time.perf_counter()
    mc = plan.mc if sigma_level is None else plan.mc.model_copy(update={"sigma_level": sigma_level})
    tasks = expand_plan(plan)
    workers = resolve_jobs(jobs, plan)
    logger.info("Scheduled %d checks on %d worker(s)", len(tasks), workers)

    if workers == 1:
        reports = [_execute(task, mc, plan.model.name) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            reports = list(executor.map(lambda task: _execute(task, mc, plan.model.name), tasks))

    echo = plan.echo()
    if sigma_level is not None:
        echo["mc"]["sigma_level"] = sigma_level
    suite = SuiteReport(
        plan_hash=config_digest or plan_hash(plan),
        plan=echo,
        reports=reports,
        wall_time=time.perf_counter() - started,
    )
    logger.info(
        "Suite finished in %.2fs: %d pass, %d fail, %d skip",
        suite.wall_time,
        suite.summary["pass"],
        suite.summary["fail"],
        suite.summary["skip"],
    )
    return suite
