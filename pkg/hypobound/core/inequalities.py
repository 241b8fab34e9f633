"""
Inequality Checks

LEARNING NOTES:
---------------
One operation per gradient bound or functional inequality. Each check
evaluates both sides with error bars and reports in the orientation
lhs <= rhs, margin = rhs - lhs. A check never decides on a point estimate
alone: the verdict compares the margin with its own standard error.

Notation (all at fixed t):
    F = F(t)            mean flow; grad P_t f(x) = F^T E[grad f(X_t)]
    C = C(t)            reverse-inequality weight (closed-form kernel covariance)
    C+ = C+(t)          right-inequality weight (SDE endpoint covariance)
    M_alpha             m0 x N map g -> sum_k alpha_{k+1} B_1..B_k g^(k+1)

THE CHECK FAMILIES:
-------------------
    be, logbe           gradient bounds through M_alpha (right, reverse, general)
    poincare, lsi       variance and entropy against the C / C+ forms
    poincare_blockwise  the same split over the blocks of the state
    wang_harnack        (P_t f(x))^alpha against C_alpha P_t(f^alpha)(y)
    hamilton            log-gradient estimate for 0 < f <= C
    harnack_power       u(x)^alpha against u(y) C^(alpha-1) C_alpha
    scaling             dilation identity for C and C+
    directional         coupling difference quotient against its bound

KEY CONCEPTS:
-------------
1. PAIRED SIDES: both sides come from one endpoint batch whenever they are
   expectations under the same law, so their errors are correlated. The
   margin error is the standard error of the difference of per-sample
   influence values.
2. TWO LAWS: Harnack-type checks compare the laws from x and from y and draw
   them on separate streams; their errors add in quadrature.
3. EXACT MODE: polynomial test functions can go through the moment oracle
   (`check_poincare(..., exact=True)`), which removes sampling error.
4. HYPOTHESES: each check demands the flags its inequality needs. A missing
   bound or Lipschitz flag raises MissingHypothesis, a missing positivity flag
   raises NotPositive. Unbounded polynomials are admitted for Poincare and
   marked hypothesis-relaxed.

Verdicts:
    Monte Carlo  pass iff margin >= -max(k * margin_stderr, 1e-10 (1 + |lhs| + |rhs|))
    exact        pass iff margin >= -(1e-12 + 1e-10 max(|lhs|, |rhs|))
t = 0 collapses every law to a point mass and is always judged exactly.
"""

from collections.abc import Callable
from dataclasses import dataclass
from math import factorial

import numpy as np
import scipy.linalg
import sympy as sp

from hypobound.core.coupling import CouplingSpec, alpha_operator, bound_samples, quotient_samples, reverse_alpha
from hypobound.core.errors import (
    BadAlpha,
    BadParams,
    BoundViolated,
    MissingHypothesis,
    NotPositive,
)
from hypobound.core.estimator import Estimate, McConfig, endpoint_batch, entropy_from_values, variance_from_values
from hypobound.core.kernel import as_poly, polynomial_semigroup
from hypobound.core.matfun import PolyMatrix, covariance_paper, covariance_sde, factor_spd, propagator
from hypobound.core.model import ModelStructure, dilation, model_dimension_check
from hypobound.core.reports import CheckContext, CheckReport, InequalityId, Variant, Verdict
from hypobound.core.testfns import TestFunction
from hypobound.logs.logger import get_logger

logger = get_logger(__name__)

EXACT_ABS_TOL = 1e-12
EXACT_REL_TOL = 1e-10
MC_FLOOR = 1e-10
SCALING_TOL = 1e-12
BLOCKWISE_TOL = 1e-9

HYPOTHESIS_RELAXED = "hypothesis-relaxed"
INFINITE_CONSTANT = "infinite-harnack-constant"


# =============================================================================
# Verdicts and report assembly
# =============================================================================


def decide(
    margin: float,
    margin_stderr: float,
    lhs: float,
    rhs: float,
    sigma_level: float,
    exact: bool,
    extra_tol: float = 0.0,
) -> Verdict:
    """Apply the Monte Carlo or exact acceptance rule to a margin."""
    if exact:
        tol = EXACT_ABS_TOL + EXACT_REL_TOL * max(abs(lhs), abs(rhs))
    else:
        tol = max(sigma_level * margin_stderr, MC_FLOOR * (1.0 + abs(lhs) + abs(rhs)))
    return Verdict.PASS if margin >= -(tol + extra_tol) else Verdict.FAIL


@dataclass
class _Side:
    """A side's value and its per-sample influence values (scalar when deterministic)."""

    value: float
    influence: np.ndarray | float = 0.0

    def spread(self, n: int) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.influence, dtype=float), (n,))


def _context(model: ModelStructure, f: TestFunction | None, t: float, x, mc: McConfig | None, **extra) -> CheckContext:
    fields = {
        "model": model.name,
        "testfn": f.kind.value if f is not None else None,
        "t": float(t),
        "x": None if x is None else np.asarray(x, dtype=float).tolist(),
    }
    if mc is not None:
        fields.update(seed=mc.seed, n=mc.n, batch=mc.batch, sigma_level=mc.sigma_level)
    fields.update(extra)
    return CheckContext(**fields)


def _paired_report(
    inequality_id: InequalityId,
    variant: Variant,
    lhs: _Side,
    rhs: _Side,
    n: int,
    context: CheckContext,
    mc: McConfig,
    notes: list[str] | None = None,
    exact: bool = False,
    extra_tol: float = 0.0,
) -> CheckReport:
    """Both sides from one batch of n draws."""
    exact = exact or n < 2
    lhs_spread, rhs_spread = lhs.spread(n), rhs.spread(n)
    if exact:
        lhs_est, rhs_est, margin_stderr = Estimate.exact(lhs.value), Estimate.exact(rhs.value), 0.0
    else:
        lhs_est = Estimate.from_influence(lhs.value, lhs_spread)
        rhs_est = Estimate.from_influence(rhs.value, rhs_spread)
        margin_stderr = float(np.std(rhs_spread - lhs_spread, ddof=1) / np.sqrt(n))
    return _finish(inequality_id, variant, lhs_est, rhs_est, margin_stderr, context, mc, notes, exact, extra_tol)


def _finish(
    inequality_id: InequalityId,
    variant: Variant,
    lhs: Estimate,
    rhs: Estimate,
    margin_stderr: float,
    context: CheckContext,
    mc: McConfig | None,
    notes: list[str] | None,
    exact: bool,
    extra_tol: float = 0.0,
) -> CheckReport:
    margin = rhs.value - lhs.value
    sigma_level = mc.sigma_level if mc is not None else 3.0
    verdict = decide(margin, margin_stderr, lhs.value, rhs.value, sigma_level, exact, extra_tol)
    context.exact = exact
    logger.debug(
        "%s/%s t=%g: lhs=%.6g rhs=%.6g margin=%.3g +/- %.3g -> %s",
        inequality_id.value,
        variant.value,
        context.t,
        lhs.value,
        rhs.value,
        margin,
        margin_stderr,
        verdict.value,
    )
    return CheckReport(
        inequality_id=inequality_id,
        variant=variant,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        margin_stderr=margin_stderr,
        verdict=verdict,
        context=context,
        notes=notes or [],
    )


# =============================================================================
# Hypothesis guards
# =============================================================================


def _require_positive(f: TestFunction, what: str) -> None:
    if not f.props.positive:
        raise NotPositive(f"{what} needs a test function flagged positive (f >= delta > 0), got {f!r}")


def _require_bounded(f: TestFunction, what: str) -> None:
    if not f.props.bounded:
        raise MissingHypothesis(f"{what} needs a bounded test function, got {f!r}")


def _require_lipschitz(f: TestFunction, what: str) -> None:
    if not f.props.globally_lipschitz:
        raise MissingHypothesis(f"{what} needs a globally Lipschitz test function, got {f!r}")


def _require_mc(mc: McConfig | None) -> None:
    if mc is None:
        raise ValueError("Monte Carlo checks need an McConfig with an explicit seed")


def _require_power(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 1:
        raise BadAlpha(f"Harnack power must exceed 1, got {alpha}")
    return alpha


def _alpha_for(model: ModelStructure, t: float, variant: Variant, alpha) -> tuple[float, ...]:
    variant = Variant(variant)
    if variant is Variant.RIGHT:
        return (1.0,) + (0.0,) * model.r
    if variant is Variant.REVERSE:
        return reverse_alpha(model, t)
    if alpha is None:
        raise BadAlpha("the general variant needs alpha_1..alpha_{r+1}")
    return tuple(float(a) for a in alpha)


# =============================================================================
# Shared sample quantities
# =============================================================================


@dataclass
class _BatchView:
    """Values and transported gradients F^T grad f(X_i) on one endpoint batch."""

    n: int
    values: np.ndarray
    raw_gradients: np.ndarray
    gradients: np.ndarray

    @classmethod
    def draw(
        cls, model: ModelStructure, f: TestFunction, t: float, x, mc: McConfig, stream: int = 0, need_grad=True
    ) -> "_BatchView":
        _require_mc(mc)
        batch = endpoint_batch(model, x, t, mc, stream=stream)
        values = np.asarray(f(batch.points), dtype=float)
        if need_grad:
            raw = f.gradient(batch.points)
            transported = raw @ propagator(model, +1)(t)
        else:
            raw = transported = np.zeros((batch.n, model.N))
        return cls(n=batch.n, values=values, raw_gradients=raw, gradients=transported)

    @property
    def mean_gradient(self) -> np.ndarray:
        """grad P_t f(x)."""
        return self.gradients.mean(axis=0)


def _form_side(view: _BatchView, k: np.ndarray) -> tuple[float, np.ndarray]:
    """q = <K G, G> at G = grad P_t f(x) and its influence 2 <K G, F^T grad f(X_i)>."""
    g = view.mean_gradient
    kg = k @ g
    return float(g @ kg), 2.0 * (view.gradients @ kg)


def _sample_forms(vectors: np.ndarray, k: np.ndarray) -> np.ndarray:
    return np.einsum("ni,ij,nj->n", vectors, k, vectors)


# =============================================================================
# Bakry-Emery family
# =============================================================================


def check_be(
    model: ModelStructure,
    f: TestFunction,
    t: float,
    x,
    variant: Variant,
    alpha=None,
    mc: McConfig | None = None,
) -> CheckReport:
    """
    ||M_alpha grad P_t f||^2_A0 <= P_t ||M_alpha F^T grad f||^2_A0.

    right:   alpha = (1, 0, ..., 0), i.e. 2 Gamma(P_t f) <= P_t <E(-t) A E^T(-t) grad f, grad f>
    reverse: alpha_k = (-t)^(k-1)/(k-1)!, i.e. <E(t) A E^T(t) grad P_t f, grad P_t f> <= 2 P_t Gamma(f)
    """
    variant = Variant(variant)
    alphas = _alpha_for(model, t, variant, alpha)
    op = alpha_operator(model, alphas)
    view = _BatchView.draw(model, f, t, x, mc)

    lhs_value, lhs_infl = _form_side(view, op.T @ model.A0 @ op)
    rhs_samples = _sample_forms(view.gradients @ op.T, model.A0)

    context = _context(model, f, t, x, mc, alpha=list(alphas))
    return _paired_report(
        InequalityId.BE,
        variant,
        _Side(lhs_value, lhs_infl),
        _Side(float(rhs_samples.mean()), rhs_samples),
        view.n,
        context,
        mc,
    )


def check_logbe(
    model: ModelStructure,
    f: TestFunction,
    t: float,
    x,
    variant: Variant,
    alpha=None,
    mc: McConfig | None = None,
) -> CheckReport:
    """
    P_t f ||M_alpha grad ln P_t f||^2_A0 <= P_t (f ||M_alpha F^T grad ln f||^2_A0).

    right:   2 P_t f Gamma(ln P_t f) <= P_t (f <E(-t) A E^T(-t) grad ln f, grad ln f>)
    reverse: P_t f <E(t) A E^T(t) grad ln P_t f, grad ln P_t f> <= 2 P_t (f Gamma(ln f))
    """
    _require_positive(f, "log Bakry-Emery estimate")
    _require_bounded(f, "log Bakry-Emery estimate")
    _require_lipschitz(f, "log Bakry-Emery estimate")
    variant = Variant(variant)
    alphas = _alpha_for(model, t, variant, alpha)
    op = alpha_operator(model, alphas)
    view = _BatchView.draw(model, f, t, x, mc)

    # grad ln P_t f = G / m, so the left side is q / m
    m = float(view.values.mean())
    q, q_infl = _form_side(view, op.T @ model.A0 @ op)
    lhs = _Side(q / m, q_infl / m - (q / m**2) * view.values)

    rhs_samples = _sample_forms(view.gradients @ op.T, model.A0) / view.values
    context = _context(model, f, t, x, mc, alpha=list(alphas))
    return _paired_report(
        InequalityId.LOGBE, variant, lhs, _Side(float(rhs_samples.mean()), rhs_samples), view.n, context, mc
    )


# =============================================================================
# Poincare and log-Sobolev
# =============================================================================


def _poincare_notes(f: TestFunction) -> list[str]:
    if f.props.bounded:
        return []
    logger.warning("Poincare check on unbounded %r: %s", f, HYPOTHESIS_RELAXED)
    return [HYPOTHESIS_RELAXED]


def _poincare_exact(model: ModelStructure, f: TestFunction, t: float, x, variant: Variant) -> tuple[float, float]:
    """(lhs, rhs) from the Gaussian moment oracle."""
    if not f.is_polynomial:
        raise BadParams(f"exact mode needs a polynomial test function, got {f.kind.value}")
    poly = f.to_polynomial()
    x = np.asarray(x, dtype=float)
    mean = polynomial_semigroup(model, poly, t, x)
    variance = polynomial_semigroup(model, poly * poly, t, x) - mean**2
    partials = [poly.diff(gen) for gen in poly.gens]

    if variant is Variant.RIGHT:
        weight = covariance_sde(model)(t)
        grad = sp.Matrix([d.as_expr() for d in partials])
        form = as_poly((grad.T * sp.Matrix(weight.tolist()) * grad)[0, 0], model.N)
        return variance, polynomial_semigroup(model, form, t, x)

    mean_grad = np.array([polynomial_semigroup(model, d, t, x) for d in partials])
    grad_pt = propagator(model, +1)(t).T @ mean_grad
    return float(grad_pt @ covariance_paper(model)(t) @ grad_pt), variance


def check_poincare(
    model: ModelStructure,
    f: TestFunction,
    t: float,
    x,
    variant: Variant,
    mc: McConfig | None = None,
    exact: bool = False,
) -> CheckReport:
    """
    right:   Var_t(f) <= P_t <C+(t) grad f, grad f>
    reverse: <C(t) grad P_t f, grad P_t f> <= Var_t(f)

    C+(t) is the right weight int_0^t E(-(t-s)) A E^T(-(t-s)) ds in closed form.
    exact=True evaluates both sides with the moment oracle (polynomial f only).
    """
    variant = Variant(variant)
    if variant is Variant.GENERAL:
        raise BadParams("Poincare inequalities come in right and reverse variants only")
    notes = _poincare_notes(f)

    if exact:
        model_dimension_check(model, [np.asarray(x, dtype=float)], ["x"])
        lhs_value, rhs_value = _poincare_exact(model, f, t, x, variant)
        context = _context(model, f, t, x, mc)
        return _finish(
            InequalityId.POINCARE,
            variant,
            Estimate.exact(lhs_value),
            Estimate.exact(rhs_value),
            0.0,
            context,
            mc,
            notes,
            exact=True,
        )

    view = _BatchView.draw(model, f, t, x, mc)
    variance = variance_from_values(view.values)
    var_side = _Side(variance.value, view.values**2 - 2.0 * float(view.values.mean()) * view.values)
    if variant is Variant.RIGHT:
        weights = _sample_forms(view.raw_gradients, covariance_sde(model)(t))
        lhs, rhs = var_side, _Side(float(weights.mean()), weights)
    else:
        lhs, rhs = _Side(*_form_side(view, covariance_paper(model)(t))), var_side
    context = _context(model, f, t, x, mc)
    return _paired_report(InequalityId.POINCARE, variant, lhs, rhs, view.n, context, mc, notes)


def blockwise_form(model: ModelStructure, t: float, sign: int, gradients: np.ndarray) -> np.ndarray:
    """
    <W g, g> for W = C+(t) (sign +1) or C(t) (sign -1), summed block by block:

        sum_{k1,k2} sign^(k1+k2) t^(k1+k2+1) / (k1! k2! (k1+k2+1)) <A0 B_1..B_k1 g^(k1+1), B_1..B_k2 g^(k2+1)>

    Diagonal terms are squared A0-norms. Works on one gradient (N,) or rows (n, N).
    """
    g = np.atleast_2d(np.asarray(gradients, dtype=float))
    heads = [g[:, block] @ chain.T for chain, block in zip(model.chain_products(), model.block_slices)]
    total = np.zeros(g.shape[0])
    for k1, h1 in enumerate(heads):
        for k2, h2 in enumerate(heads):
            degree = k1 + k2 + 1
            coeff = sign ** (k1 + k2) * t**degree / (factorial(k1) * factorial(k2) * degree)
            total += coeff * np.einsum("ni,ij,nj->n", h1, model.A0, h2)
    return total


def check_poincare_blockwise(
    model: ModelStructure, f: TestFunction, t: float, x, variant: Variant, mc: McConfig | None = None
) -> CheckReport:
    """Poincare pair with the weights expanded block by block, cross-checked against the matrix form."""
    variant = Variant(variant)
    if variant is Variant.GENERAL:
        raise BadParams("Poincare inequalities come in right and reverse variants only")
    notes = _poincare_notes(f)
    view = _BatchView.draw(model, f, t, x, mc)
    variance = variance_from_values(view.values)
    var_side = _Side(variance.value, view.values**2 - 2.0 * float(view.values.mean()) * view.values)

    if variant is Variant.RIGHT:
        blockwise = blockwise_form(model, t, +1, view.raw_gradients)
        matrix_form = _sample_forms(view.raw_gradients, covariance_sde(model)(t))
        lhs, rhs = var_side, _Side(float(blockwise.mean()), blockwise)
    else:
        g = view.mean_gradient
        blockwise = blockwise_form(model, t, -1, g)
        matrix_form = np.atleast_1d(g @ covariance_paper(model)(t) @ g)
        c_g = covariance_paper(model)(t) @ g
        lhs, rhs = _Side(float(blockwise[0]), 2.0 * (view.gradients @ c_g)), var_side

    gap = float(np.max(np.abs(blockwise - matrix_form)))
    scale = 1.0 + float(np.max(np.abs(matrix_form)))
    context = _context(model, f, t, x, mc)
    report = _paired_report(InequalityId.POINCARE_BLOCKWISE, variant, lhs, rhs, view.n, context, mc, notes)
    if gap > BLOCKWISE_TOL * scale:
        report.verdict = Verdict.FAIL
        report.reason = f"blockwise and matrix forms differ by {gap:.3e}"
        logger.warning("Blockwise weight disagrees with matrix form by %.3e", gap)
    return report


def check_lsi(
    model: ModelStructure, f: TestFunction, t: float, x, variant: Variant, mc: McConfig | None = None
) -> CheckReport:
    """
    right:   Ent_t(f) <= 1/2 P_t (f <C+(t) grad ln f, grad ln f>)
    reverse: 1/2 P_t f <C(t) grad ln P_t f, grad ln P_t f> <= Ent_t(f)
    """
    _require_positive(f, "log-Sobolev inequality")
    _require_bounded(f, "log-Sobolev inequality")
    variant = Variant(variant)
    if variant is Variant.GENERAL:
        raise BadParams("log-Sobolev inequalities come in right and reverse variants only")
    view = _BatchView.draw(model, f, t, x, mc)
    if np.min(view.values) <= 0:
        raise NotPositive(f"test function took the value {np.min(view.values):.3e}")

    m = float(view.values.mean())
    entropy = entropy_from_values(view.values)
    ent_side = _Side(entropy.value, view.values * np.log(view.values) - (np.log(m) + 1.0) * view.values)

    if variant is Variant.RIGHT:
        samples = 0.5 * _sample_forms(view.raw_gradients, covariance_sde(model)(t)) / view.values
        lhs, rhs = ent_side, _Side(float(samples.mean()), samples)
    else:
        q, q_infl = _form_side(view, covariance_paper(model)(t))
        lhs, rhs = _Side(0.5 * q / m, 0.5 * (q_infl / m - (q / m**2) * view.values)), ent_side
    context = _context(model, f, t, x, mc)
    return _paired_report(InequalityId.LSI, variant, lhs, rhs, view.n, context, mc)


# =============================================================================
# Harnack-type bounds
# =============================================================================


def harnack_constant(model: ModelStructure, t: float, x, y, alpha: float) -> float:
    """
    C_alpha = exp(alpha / (2 (alpha - 1)) <C(t)^-1 (y - x), y - x>).

    At t = 0 the constant is 1 for y = x and infinite otherwise.
    """
    alpha = _require_power(alpha)
    d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    if t == 0:
        return 1.0 if not np.any(d) else float("inf")
    factor = factor_spd(covariance_paper(model)(t))
    quad = float(d @ scipy.linalg.cho_solve((factor.lower, True), d))
    return float(np.exp(alpha / (2.0 * (alpha - 1.0)) * quad))


def _two_law_report(
    inequality_id: InequalityId,
    lhs: Estimate,
    rhs: Estimate,
    context: CheckContext,
    mc: McConfig,
    notes: list[str] | None = None,
) -> CheckReport:
    exact = lhs.n < 2 and rhs.n < 2
    margin_stderr = float(np.hypot(lhs.stderr, rhs.stderr))
    return _finish(inequality_id, Variant.GENERAL, lhs, rhs, margin_stderr, context, mc, notes, exact)


def _harnack_at_time_zero(
    inequality_id: InequalityId,
    lhs_value: float,
    rhs_value: float,
    same_point: bool,
    context: CheckContext,
    mc: McConfig | None,
) -> CheckReport:
    """
    P_0 is the identity. C_alpha is 1 at y = x and infinite otherwise, so a
    distinct y gives an identity check with zero margin.
    """
    if same_point:
        lhs, rhs, notes = Estimate.exact(lhs_value), Estimate.exact(rhs_value), None
    else:
        lhs = rhs = Estimate.exact(lhs_value)
        notes = [INFINITE_CONSTANT]
    return _finish(inequality_id, Variant.GENERAL, lhs, rhs, 0.0, context, mc, notes, exact=True)


def check_wang_harnack(
    model: ModelStructure, f: TestFunction, t: float, x, y, alpha: float, mc: McConfig | None = None
) -> CheckReport:
    """(P_t f(x))^alpha <= C_alpha P_t(f^alpha)(y), with the two laws on streams 0 and 1."""
    alpha = _require_power(alpha)
    _require_bounded(f, "Wang-Harnack inequality")
    if f.props.lower_bound is None or f.props.lower_bound < 0:
        raise MissingHypothesis(f"Wang-Harnack inequality needs a nonnegative test function, got {f!r}")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    model_dimension_check(model, [x, y], ["x", "y"])
    if t == 0:
        context = _context(model, f, t, x, mc, y=y.tolist(), power=alpha)
        return _harnack_at_time_zero(
            InequalityId.WANG_HARNACK, float(f(x)) ** alpha, float(f(y)) ** alpha, np.array_equal(x, y), context, mc
        )
    constant = harnack_constant(model, t, x, y, alpha)

    at_x = _BatchView.draw(model, f, t, x, mc, stream=0, need_grad=False)
    at_y = _BatchView.draw(model, f, t, y, mc, stream=1, need_grad=False)
    m_x = float(at_x.values.mean())
    powered = constant * at_y.values**alpha

    lhs = Estimate.from_influence(m_x**alpha, alpha * m_x ** (alpha - 1.0) * at_x.values)
    rhs = Estimate.from_influence(float(powered.mean()), powered)
    context = _context(model, f, t, x, mc, y=np.asarray(y, dtype=float).tolist(), power=alpha)
    return _two_law_report(InequalityId.WANG_HARNACK, lhs, rhs, context, mc)


def _bounded_values(values: np.ndarray, c_bound: float) -> None:
    if not c_bound > 0:
        raise BoundViolated(f"upper bound C must be positive, got {c_bound}")
    top = float(np.max(values))
    if top > c_bound * (1.0 + 1e-12):
        raise BoundViolated(f"test function reached {top:.6g}, above the bound C = {c_bound:.6g}")


def check_hamilton(
    model: ModelStructure, f: TestFunction, c_bound: float, t: float, x, mc: McConfig | None = None
) -> CheckReport:
    """1/2 <C(t) grad ln u, grad ln u> <= ln(C / u) for u = P_t f, 0 < f <= C."""
    _require_positive(f, "Hamilton gradient estimate")
    _require_bounded(f, "Hamilton gradient estimate")
    view = _BatchView.draw(model, f, t, x, mc)
    _bounded_values(view.values, c_bound)

    u = float(view.values.mean())
    q, q_infl = _form_side(view, covariance_paper(model)(t))
    lhs = _Side(0.5 * q / u**2, 0.5 * q_infl / u**2 - (q / u**3) * view.values)
    rhs = _Side(float(np.log(c_bound / u)), -view.values / u)
    context = _context(model, f, t, x, mc, c_bound=float(c_bound))
    return _paired_report(InequalityId.HAMILTON, Variant.GENERAL, lhs, rhs, view.n, context, mc)


def check_harnack_power(
    model: ModelStructure,
    f: TestFunction,
    c_bound: float,
    t: float,
    x,
    y,
    alpha: float,
    mc: McConfig | None = None,
) -> CheckReport:
    """u(x)^alpha <= u(y) C^(alpha-1) C_alpha for u = P_t f, 0 < f <= C."""
    alpha = _require_power(alpha)
    _require_positive(f, "Harnack inequality with power")
    _require_bounded(f, "Harnack inequality with power")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    model_dimension_check(model, [x, y], ["x", "y"])
    if t == 0:
        fx, fy = float(f(x)), float(f(y))
        _bounded_values(np.array([fx, fy]), c_bound)
        context = _context(model, f, t, x, mc, y=y.tolist(), power=alpha, c_bound=float(c_bound))
        rhs = float(c_bound) ** (alpha - 1.0) * fy
        return _harnack_at_time_zero(InequalityId.HARNACK_POWER, fx**alpha, rhs, np.array_equal(x, y), context, mc)
    constant = harnack_constant(model, t, x, y, alpha) * float(c_bound) ** (alpha - 1.0)

    at_x = _BatchView.draw(model, f, t, x, mc, stream=0, need_grad=False)
    at_y = _BatchView.draw(model, f, t, y, mc, stream=1, need_grad=False)
    _bounded_values(at_x.values, c_bound)
    _bounded_values(at_y.values, c_bound)
    u_x = float(at_x.values.mean())

    lhs = Estimate.from_influence(u_x**alpha, alpha * u_x ** (alpha - 1.0) * at_x.values)
    rhs = Estimate.from_influence(constant * float(at_y.values.mean()), constant * at_y.values)
    context = _context(
        model, f, t, x, mc, y=np.asarray(y, dtype=float).tolist(), power=alpha, c_bound=float(c_bound)
    )
    return _two_law_report(InequalityId.HARNACK_POWER, lhs, rhs, context, mc)


# =============================================================================
# Scaling and directional bounds
# =============================================================================


def scaling_error(model: ModelStructure, t: float, covariance: Callable[[ModelStructure], PolyMatrix]) -> float:
    """max |delta^-1 K(t) delta^-1 - K(1)| / max |K(1)| with delta = delta_sqrt(t) and K = covariance(model)."""
    k1 = covariance(model)(1.0)
    if t == 0:
        # delta_0 = 0, so the identity reads K(0) = 0
        return float(np.max(np.abs(covariance(model)(0.0))) / np.max(np.abs(k1)))
    scale = dilation(model, float(np.sqrt(t))).diag
    rescaled = covariance(model)(t) / np.outer(scale, scale)
    return float(np.max(np.abs(rescaled - k1)) / np.max(np.abs(k1)))


def check_scaling(model: ModelStructure, t: float) -> CheckReport:
    """
    C(t) = delta_sqrt(t) C(1) delta_sqrt(t), and the same for C+(t).

    lhs is the larger of the two `scaling_error`s, rhs the tolerance 1e-12.
    """
    error = max(scaling_error(model, t, covariance_paper), scaling_error(model, t, covariance_sde))
    lhs, rhs = Estimate.exact(error), Estimate.exact(SCALING_TOL)
    verdict = Verdict.PASS if error <= SCALING_TOL else Verdict.FAIL
    return CheckReport(
        inequality_id=InequalityId.SCALING,
        variant=Variant.GENERAL,
        lhs=lhs,
        rhs=rhs,
        margin=SCALING_TOL - error,
        margin_stderr=0.0,
        verdict=verdict,
        context=CheckContext(model=model.name, t=float(t), exact=True),
    )


def check_directional(
    model: ModelStructure,
    f: TestFunction,
    t: float,
    x,
    cs: CouplingSpec,
    mc: McConfig | None = None,
    variant: Variant = Variant.GENERAL,
) -> CheckReport:
    """
    |P_t f(x + D/2) - P_t f(x - D/2)| / eps <= P_t |v . M_alpha F^T grad f|

    The left side is the coupling difference quotient; the central form is
    exact for quadratics and carries an O(eps^2) error otherwise.
    """
    _require_mc(mc)
    batch = endpoint_batch(model, x, t, mc)
    quotients = quotient_samples(model, f, cs, t, batch.points)
    bounds = bound_samples(model, f, cs, t, batch.points)
    mean_quotient = float(quotients.mean())
    sign = 1.0 if mean_quotient >= 0 else -1.0
    context = _context(
        model, f, t, x, mc, alpha=list(cs.alpha), direction=cs.v.tolist(), eps=float(cs.eps)
    )
    return _paired_report(
        InequalityId.DIRECTIONAL,
        Variant(variant),
        _Side(abs(mean_quotient), sign * quotients),
        _Side(float(bounds.mean()), bounds),
        batch.n,
        context,
        mc,
        extra_tol=cs.eps**2 * (1.0 + abs(mean_quotient) + float(bounds.mean())),
    )
