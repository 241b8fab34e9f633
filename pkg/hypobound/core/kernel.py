"""
Endpoint Law of the Diffusion

Started at x0, the SDE endpoint is Gaussian:

    X_t ~ N(F(t) x0, C+(t)),   F(t) = exp(t B^T)

The closed-form kernel h(x, t; xi, 0) = p(x - E(t) xi, t) uses C(t) and mean
exp(-t B^T) xi; it differs from the SDE law by the block sign conjugation S.
Both are exposed through `KernelConvention`; every inequality check uses the
SDE law, which is the one the synchronous couplings are built on.
"""

from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np
import scipy.linalg
import sympy as sp

from hypobound.core.errors import DegreeTooHigh, DimensionMismatch
from hypobound.core.matfun import SpdFactorization, covariance_paper, covariance_sde, factor_spd, propagator
from hypobound.core.model import ModelStructure
from hypobound.logs.logger import get_logger

logger = get_logger(__name__)

MAX_ORACLE_DEGREE = 6


class KernelConvention(str, Enum):
    """Which Gaussian kernel `density` evaluates."""

    PAPER = "paper"
    SDE = "sde"


# =============================================================================
# Domain types
# =============================================================================


@dataclass(frozen=True)
class GaussianLaw:
    """Mean vector, covariance and its factorization."""

    mean: np.ndarray
    cov: np.ndarray
    factor: SpdFactorization

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class SampleBatch:
    """n endpoint draws with the seed record that reproduces them."""

    points: np.ndarray
    seed: int
    n: int
    stream: int = 0
    batch: int = 0


# =============================================================================
# Laws and densities
# =============================================================================


def endpoint_moments(model: ModelStructure, x0: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """(F(t) x0, C+(t)) without factorization; valid at t = 0."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.N,):
        raise DimensionMismatch(f"start point has shape {x0.shape}, model has N = {model.N}")
    return propagator(model, +1)(t) @ x0, covariance_sde(model)(t)


def transition_law(model: ModelStructure, x0: np.ndarray, t: float) -> GaussianLaw:
    """Exact SDE endpoint law N(F(t) x0, C+(t)) for t > 0."""
    if not t > 0:
        raise ValueError(f"transition_law needs t > 0, got {t}")
    mean, cov = endpoint_moments(model, x0, t)
    return GaussianLaw(mean=mean, cov=cov, factor=factor_spd(cov))


def _law_for(model: ModelStructure, t: float, xi: np.ndarray, convention: KernelConvention) -> GaussianLaw:
    convention = KernelConvention(convention)
    if convention is KernelConvention.SDE:
        return transition_law(model, xi, t)
    if not t > 0:
        raise ValueError(f"density needs t > 0, got {t}")
    cov = covariance_paper(model)(t)
    return GaussianLaw(mean=propagator(model, -1)(t) @ np.asarray(xi, dtype=float), cov=cov, factor=factor_spd(cov))


def log_density(
    model: ModelStructure,
    x: np.ndarray,
    t: float,
    xi: np.ndarray,
    convention: KernelConvention = KernelConvention.SDE,
) -> np.ndarray | float:
    """Log of the Gaussian transition density at x (N,) or at a batch (n, N)."""
    law = _law_for(model, t, xi, convention)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    centered = np.atleast_2d(x) - law.mean
    whitened = scipy.linalg.solve_triangular(law.factor.lower, centered.T, lower=True)
    quad = np.sum(whitened**2, axis=0)
    values = -0.5 * quad - 0.5 * law.factor.logdet - 0.5 * law.dim * np.log(2.0 * np.pi)
    return float(values[0]) if single else values


def density(
    model: ModelStructure,
    x: np.ndarray,
    t: float,
    xi: np.ndarray,
    convention: KernelConvention = KernelConvention.SDE,
) -> np.ndarray | float:
    """
    Transition density.

    convention=paper evaluates p(x - E(t) xi, t) with C(t) and mean E(t) xi;
    convention=sde evaluates the density of `transition_law(model, xi, t)`.
    """
    return np.exp(log_density(model, x, t, xi, convention))


# =============================================================================
# Sampling
# =============================================================================


def batch_sizes(n: int, batch: int | None) -> list[int]:
    batch = n if batch is None else max(1, min(batch, n))
    full, rest = divmod(n, batch)
    return [batch] * full + ([rest] if rest else [])


def sample_endpoints(law: GaussianLaw, n: int, seed: int, batch: int | None = None, stream: int = 0) -> SampleBatch:
    """
    i.i.d. draws mean + L z.

    Batch b uses the generator keyed by SeedSequence(seed, spawn_key=(stream, b));
    batches are concatenated in ascending order, so results depend only on
    (seed, stream, n, batch).
    """
    if n < 1:
        raise ValueError(f"sample count must be at least 1, got {n}")
    chunks = []
    for index, size in enumerate(batch_sizes(n, batch)):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, index)))
        z = rng.standard_normal((size, law.dim))
        chunks.append(law.mean + z @ law.factor.lower.T)
    return SampleBatch(points=np.concatenate(chunks), seed=seed, n=n, stream=stream, batch=batch or n)


# =============================================================================
# Polynomial oracle
# =============================================================================


def state_symbols(dim: int) -> tuple[sp.Symbol, ...]:
    """Coordinates x0, ..., x{dim-1} of the state space."""
    return tuple(sp.symbols(f"x0:{dim}"))


def as_poly(expr: sp.Expr | float, dim: int) -> sp.Poly:
    """Expression in `state_symbols(dim)` as a real polynomial in all N coordinates."""
    return sp.Poly(expr, *state_symbols(dim), domain="RR")


def evaluate_poly(poly: sp.Poly, points: np.ndarray) -> np.ndarray | float:
    """Value at a point (N,) or a batch (n, N)."""
    points = np.asarray(points, dtype=float)
    single = points.ndim == 1
    points = np.atleast_2d(points)
    fn = sp.lambdify(poly.gens, poly.as_expr(), "numpy")
    values = np.broadcast_to(np.asarray(fn(*points.T), dtype=float), (points.shape[0],))
    return float(values[0]) if single else values.copy()


class _WickMoments:
    """Central Gaussian moments E[Y_i1 ... Y_ik] by recursive pairing, memoized."""

    def __init__(self, cov: np.ndarray):
        self._cov = cov
        self._memo: dict[tuple[int, ...], float] = {(): 1.0}

    def central(self, indices: tuple[int, ...]) -> float:
        if len(indices) % 2:
            return 0.0
        key = tuple(sorted(indices))
        if key not in self._memo:
            first, rest = key[0], key[1:]
            total = 0.0
            for j, partner in enumerate(rest):
                total += self._cov[first, partner] * self.central(rest[:j] + rest[j + 1 :])
            self._memo[key] = total
        return self._memo[key]

    def raw(self, indices: tuple[int, ...], mean: np.ndarray) -> float:
        """E[prod_p (mu_ip + Y_ip)] expanded over subsets of centered factors."""
        positions = range(len(indices))
        total = 0.0
        for size in range(0, len(indices) + 1, 2):
            for chosen in combinations(positions, size):
                rest = [indices[p] for p in positions if p not in chosen]
                total += np.prod(mean[rest]) * self.central(tuple(indices[p] for p in chosen))
        return float(total)


def polynomial_semigroup(model: ModelStructure, f: sp.Poly, t: float, x0: np.ndarray) -> float:
    """Exact E[f(X_t) | X_0 = x0] for polynomials of total degree <= 6."""
    if len(f.gens) != model.N:
        raise DimensionMismatch(f"polynomial has {len(f.gens)} variables, model has N = {model.N}")
    if f.total_degree() > MAX_ORACLE_DEGREE:
        raise DegreeTooHigh(f"polynomial degree {f.total_degree()} exceeds {MAX_ORACLE_DEGREE}")
    if t == 0:
        return evaluate_poly(f, np.asarray(x0, dtype=float))

    mean, cov = endpoint_moments(model, x0, t)
    moments = _WickMoments(cov)
    value = 0.0
    for monom, coeff in f.terms():
        indices = tuple(i for i, e in enumerate(monom) for _ in range(e))
        value += float(coeff) * moments.raw(indices, mean)
    return float(value)
