"""
Synchronous Couplings

Two copies X, X~ of the diffusion driven by the same Brownian motion differ by
a deterministic amount: with start offset Delta = x - x~,

    X_t - X~_t = F(t) Delta.

The start offset is parametrised by alpha (alpha_1 = 1), a first-block
direction v and a scale eps:

    Delta^(k) = eps alpha_k B_{k-1}^T ... B_1^T v

so block k of the offset is eps (sum_{i<k} alpha_{k-i} t^i / i!) B_{k-1}^T ... B_1^T v.
Because the system is linear the coupling is realised at the endpoint: one
exact Gaussian draw X_t, shadow X_t - F(t) Delta. The Euler path simulator is
an independent oracle for the same objects.
"""

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from hypobound.core.errors import BadAlpha, BadParams, DimensionMismatch
from hypobound.core.estimator import Estimate, McConfig, endpoint_batch
from hypobound.core.kernel import SampleBatch, sample_endpoints, transition_law
from hypobound.core.matfun import PolyMatrix, propagator
from hypobound.core.model import ModelStructure, assemble_drift, model_dimension_check
from hypobound.core.testfns import TestFunction
from hypobound.logs.logger import get_logger

logger = get_logger(__name__)

DEFAULT_EPS = 1e-4


# =============================================================================
# Domain types
# =============================================================================


@dataclass(frozen=True)
class CouplingSpec:
    """alpha_1..alpha_{r+1} with alpha_1 = 1, first-block direction v, scale eps."""

    alpha: tuple[float, ...]
    v: np.ndarray
    eps: float = DEFAULT_EPS

    def __post_init__(self) -> None:
        alpha = tuple(float(a) for a in self.alpha)
        if not alpha or alpha[0] != 1.0:
            raise BadAlpha(f"alpha_1 must be exactly 1, got {alpha[:1]}")
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        if not np.linalg.norm(v) > 0:
            raise BadParams("coupling direction v must be nonzero")
        if not self.eps > 0:
            raise BadParams(f"coupling scale eps must be positive, got {self.eps}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "v", v)

    @classmethod
    def right(cls, model: ModelStructure, v: np.ndarray, eps: float = DEFAULT_EPS) -> "CouplingSpec":
        """alpha = (1, 0, ..., 0): only the first block is shifted."""
        return cls(alpha=(1.0,) + (0.0,) * model.r, v=v, eps=eps)

    @classmethod
    def reverse(cls, model: ModelStructure, t0: float, v: np.ndarray, eps: float = DEFAULT_EPS) -> "CouplingSpec":
        """alpha_k = (-1)^(k-1) t0^(k-1) / (k-1)!: offsets of blocks 2..r+1 vanish at t0."""
        return cls(alpha=reverse_alpha(model, t0), v=v, eps=eps)


@dataclass(frozen=True)
class CoupledPair:
    """Start points of the two copies and the offset X_t - X~_t as a polynomial in t."""

    primary_start: np.ndarray
    shadow_start: np.ndarray
    offset_poly: PolyMatrix = field(repr=False)

    def offset(self, t: float) -> np.ndarray:
        return self.offset_poly(t)[:, 0]

    def block_offsets(self, model: ModelStructure, t: float) -> list[np.ndarray]:
        off = self.offset(t)
        return [off[s] for s in model.block_slices]


@dataclass(frozen=True)
class CoupledSample:
    """Exact endpoint draws of both copies."""

    primary: SampleBatch
    shadow: np.ndarray


@dataclass(frozen=True)
class DiscretePath:
    times: np.ndarray
    states: np.ndarray

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]


# =============================================================================
# Coefficient helpers
# =============================================================================


def reverse_alpha(model: ModelStructure, t0: float) -> tuple[float, ...]:
    return tuple((-t0) ** k / factorial(k) for k in range(model.r + 1))


def alpha_operator(model: ModelStructure, alpha: tuple[float, ...] | list[float]) -> np.ndarray:
    """
    m0 x N matrix M with g -> sum_k alpha_{k+1} B_1 ... B_k g^(k+1).

    M^T v is the start offset per unit eps, and ||M g||_A0 is the gradient
    combination of the Bakry-Emery family.
    """
    if len(alpha) != model.r + 1:
        raise BadAlpha(f"alpha has {len(alpha)} entries, model needs r + 1 = {model.r + 1}")
    if float(alpha[0]) != 1.0:
        raise BadAlpha(f"alpha_1 must be exactly 1, got {alpha[0]}")
    op = np.zeros((model.dims[0], model.N))
    for k, (chain, block) in enumerate(zip(model.chain_products(), model.block_slices)):
        op[:, block] = float(alpha[k]) * chain
    return op


def transported_alpha_operator(model: ModelStructure, alpha: tuple[float, ...] | list[float], t: float) -> np.ndarray:
    """M F(t)^T: block k carries (sum_{i<=k} alpha_{k-i+1} t^i / i!) B_1 ... B_k."""
    return alpha_operator(model, alpha) @ propagator(model, +1)(t).T


# =============================================================================
# Operations
# =============================================================================


def coupled_start(x: np.ndarray, cs: CouplingSpec, model: ModelStructure) -> CoupledPair:
    """Shadow start x~ = x - eps M^T v and the offset polynomial F(t)(x - x~)."""
    x = np.asarray(x, dtype=float)
    model_dimension_check(model, [x], ["x"])
    if cs.v.shape != (model.dims[0],):
        raise DimensionMismatch(f"direction v has shape {cs.v.shape}, first block has m0 = {model.dims[0]}")
    delta = cs.eps * (alpha_operator(model, cs.alpha).T @ cs.v)
    offset_poly = propagator(model, +1) @ delta[:, None]
    return CoupledPair(primary_start=x, shadow_start=x - delta, offset_poly=offset_poly)


def sample_coupled_pair(
    model: ModelStructure, pair: CoupledPair, t: float, n: int, seed: int, batch: int | None = None
) -> CoupledSample:
    """Draw X_t from the primary start and set X~_t = X_t - offset(t)."""
    if not t > 0:
        raise ValueError(f"sample_coupled_pair needs t > 0, got {t}")
    primary = sample_endpoints(transition_law(model, pair.primary_start, t), n, seed, batch=batch)
    return CoupledSample(primary=primary, shadow=primary.points - pair.offset(t))


def quotient_samples(
    model: ModelStructure, f: TestFunction, cs: CouplingSpec, t: float, points: np.ndarray
) -> np.ndarray:
    """
    Per-sample central difference quotients (f(X + F D/2) - f(X - F D/2)) / eps.

    `points` are endpoint draws from the midpoint x; X +/- F(t) D / 2 are then
    the synchronously coupled endpoints from x +/- D / 2.
    """
    pair = coupled_start(np.zeros(model.N), cs, model)
    half = 0.5 * pair.offset(t)
    return (f(points + half) - f(points - half)) / cs.eps


def bound_samples(model: ModelStructure, f: TestFunction, cs: CouplingSpec, t: float, points: np.ndarray) -> np.ndarray:
    """Per-sample |v . M F(t)^T grad f(X)|, the integrand of the directional bound."""
    weights = transported_alpha_operator(model, cs.alpha, t)
    return np.abs(f.gradient(points) @ weights.T @ cs.v)


def difference_quotient(
    model: ModelStructure, f: TestFunction, cs: CouplingSpec, t: float, x: np.ndarray, mc: McConfig
) -> Estimate:
    """(P_t f(x + D/2) - P_t f(x - D/2)) / eps with common random numbers."""
    batch = endpoint_batch(model, x, t, mc)
    return Estimate.from_samples(quotient_samples(model, f, cs, t, batch.points))


def directional_bound(
    model: ModelStructure, f: TestFunction, cs: CouplingSpec, t: float, x: np.ndarray, mc: McConfig
) -> Estimate:
    """P_t |sum_k (sum_i alpha_{k-i} t^i / i!) B_1 ... B_k grad^(k+1) f . v| on the same batch."""
    batch = endpoint_batch(model, x, t, mc)
    return Estimate.from_samples(bound_samples(model, f, cs, t, batch.points))


def trajectory_simulate(
    model: ModelStructure, x: np.ndarray, dt: float, T: float, seed: int, sigma: np.ndarray | None = None
) -> DiscretePath:
    """
    Euler-Maruyama path of dX_1 = sigma dW, dX_{k+1} = B_k^T X_k dt.

    The step count is round(T / dt) and the step is adjusted to land on T.
    Increments depend only on (seed, step count), so two calls with the same
    seed are synchronously coupled. sigma overrides the model's sigma
    (sigma = 0 gives the deterministic Euler flow).
    """
    x = np.asarray(x, dtype=float)
    model_dimension_check(model, [x], ["x"])
    if not 0 < dt <= T:
        raise ValueError(f"need 0 < dt <= T, got dt={dt}, T={T}")

    steps = max(1, int(round(T / dt)))
    h = T / steps
    sigma = model.sigma if sigma is None else np.broadcast_to(np.asarray(sigma, dtype=float), model.sigma.shape)
    m0 = model.dims[0]

    step_matrix = np.eye(model.N) + h * assemble_drift(model)

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    increments = rng.standard_normal((steps, m0)) * np.sqrt(h)

    states = np.empty((steps + 1, model.N))
    states[0] = x
    for i in range(steps):
        nxt = step_matrix @ states[i]
        nxt[:m0] += sigma @ increments[i]
        states[i + 1] = nxt
    logger.debug("Simulated %d Euler steps of size %.3e", steps, h)
    return DiscretePath(times=np.linspace(0.0, T, steps + 1), states=states)
