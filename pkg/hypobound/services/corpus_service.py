"""
Corpus Service - Randomized Theorem Corpus

Draws random scenarios (model with r <= 3 and blocks up to 3 x 3, bounded
positive test function, t in [0.1, 5], start points x and y) and runs every
theorem-backed check on each:

    be          right, reverse, general with five random alpha
    logbe       right, reverse
    poincare    right, reverse
    lsi         right, reverse
    wang        alpha in {1.5, 2, 4}
    hamilton, harnack_power (alpha = 2)

Every check is a theorem, so at k = 3 only the statistical false-alarm rate
is expected to fail. Scenario i draws everything from
SeedSequence(master_seed, spawn_key=(i,)), so the corpus does not depend on
the worker count.
"""

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from hypobound.core.errors import HypoboundError
from hypobound.core.estimator import McConfig
from hypobound.core.inequalities import (
    check_be,
    check_hamilton,
    check_harnack_power,
    check_logbe,
    check_lsi,
    check_poincare,
    check_wang_harnack,
)
from hypobound.core.model import random_structure
from hypobound.core.reports import CheckReport, Variant, Verdict
from hypobound.core.testfns import TestFunction, make_testfn
from hypobound.logs.logger import get_logger

logger = get_logger(__name__)

KINDS = ["logistic", "exp-neg-quadratic", "shifted-positive"]
GENERAL_ALPHAS = 5
WANG_POWERS = (1.5, 2.0, 4.0)
MAX_FAIL_RATE = 0.01


@dataclass
class CorpusResult:
    """Reports of every scenario plus the tallies the acceptance rule looks at."""

    scenarios: int
    reports: list[CheckReport] = field(default_factory=list)
    errors: int = 0

    @property
    def counts(self) -> Counter:
        return Counter(report.verdict.value for report in self.reports)

    @property
    def failures(self) -> list[CheckReport]:
        return [report for report in self.reports if report.verdict is Verdict.FAIL]

    @property
    def fail_rate(self) -> float:
        return len(self.failures) / max(1, len(self.reports))

    @property
    def acceptable(self) -> bool:
        return self.fail_rate < MAX_FAIL_RATE


def random_testfn(rng: np.random.Generator, dim: int) -> TestFunction:
    """Bounded, positive test function of a random kind."""
    kind = KINDS[int(rng.integers(len(KINDS)))]
    delta = float(rng.uniform(0.1, 1.0))
    scale = float(rng.uniform(0.5, 2.0))
    if kind == "exp-neg-quadratic":
        g = rng.normal(size=(dim, dim)) / np.sqrt(dim)
        q = 0.3 * (g @ g.T) + 0.05 * np.eye(dim)
        return make_testfn(kind, {"Q": q.tolist(), "center": rng.normal(size=dim).tolist(), "s": scale, "delta": delta})
    a = (rng.normal(size=dim) / np.sqrt(dim)).tolist()
    return make_testfn(kind, {"a": a, "b": float(rng.normal()), "s": scale, "delta": delta})


def scenario_checks(index: int, master_seed: int, n: int) -> tuple[list[CheckReport], int]:
    """All checks of one scenario and the number that raised instead of reporting."""
    rng = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))
    model = random_structure(rng, r_max=3, max_block=3)
    f = random_testfn(rng, model.N)
    t = float(rng.uniform(0.1, 5.0))
    x = rng.normal(size=model.N)
    y = x + 0.5 * rng.normal(size=model.N)
    alphas = [[1.0] + rng.normal(size=model.r).tolist() for _ in range(GENERAL_ALPHAS)]
    mc = McConfig(n=n, seed=int(rng.integers(2**31)))
    c_bound = f.props.upper_bound

    runs = [
        lambda: check_be(model, f, t, x, Variant.RIGHT, mc=mc),
        lambda: check_be(model, f, t, x, Variant.REVERSE, mc=mc),
        lambda: check_logbe(model, f, t, x, Variant.RIGHT, mc=mc),
        lambda: check_logbe(model, f, t, x, Variant.REVERSE, mc=mc),
        lambda: check_poincare(model, f, t, x, Variant.RIGHT, mc=mc),
        lambda: check_poincare(model, f, t, x, Variant.REVERSE, mc=mc),
        lambda: check_lsi(model, f, t, x, Variant.RIGHT, mc=mc),
        lambda: check_lsi(model, f, t, x, Variant.REVERSE, mc=mc),
        lambda: check_hamilton(model, f, c_bound, t, x, mc=mc),
        lambda: check_harnack_power(model, f, c_bound, t, x, y, 2.0, mc=mc),
    ]
    runs += [lambda a=a: check_be(model, f, t, x, Variant.GENERAL, a, mc=mc) for a in alphas]
    runs += [lambda p=p: check_wang_harnack(model, f, t, x, y, p, mc=mc) for p in WANG_POWERS]

    reports, errors = [], 0
    for run in runs:
        try:
            report = run()
        except HypoboundError as exc:
            logger.warning("Scenario %d: %s: %s", index, type(exc).__name__, exc)
            errors += 1
            continue
        report.context.testfn = f"{f.kind.value}#{index}"
        report.context.master_seed = master_seed
        reports.append(report)
    return reports, errors


def run_corpus(scenarios: int = 200, n: int = 100_000, seed: int = 2024, jobs: int = 1) -> CorpusResult:
    """Run every scenario; reports come back in scenario order."""
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
        batches = list(executor.map(lambda i: scenario_checks(i, seed, n), range(scenarios)))

    result = CorpusResult(scenarios=scenarios)
    for reports, errors in batches:
        result.reports.extend(reports)
        result.errors += errors
    logger.info("%d scenarios, %d checks: %s", scenarios, len(result.reports), dict(result.counts))
    return result
