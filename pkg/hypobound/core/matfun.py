"""
Exact Matrix Functions of t

LEARNING NOTES:
---------------
B is nilpotent (B^(r+1) = 0), so every matrix function used here is a finite
polynomial in t:

    E(t)  = exp(-t B^T) = sum_k (-t)^k (B^T)^k / k!
    F(t)  = exp(+t B^T)                       (mean flow of the SDE)
    C(t)  = int_0^t E(s) A E(s)^T ds          (covariance of the closed-form kernel)
    C+(t) = int_0^t F(s) A F(s)^T ds          (endpoint covariance of the SDE)

C+(t) is also the right Poincare / log-Sobolev weight
int_0^t E(-(t-s)) A E^T(-(t-s)) ds, and C+(t) = S C(t) S with
S = diag((-1)^k I_mk).

KEY CONCEPTS:
-------------
1. POLYMATRIX: coefficient stack coeffs[k] of t^k. Products, transposes and
   integration stay exact; a value only appears when a PolyMatrix is called.
2. BLOCK CLOSED FORM: block (k2, k1) of C or C+ is a single monomial in t
   built from the chain products B_1..B_k and A0 (see `_covariance`).
3. THREE ROUTES TO ONE INTEGRAL: closed form, exact integration of
   F A F^T (`lyapunov_integral`) and Gauss-Legendre quadrature. The tests
   hold them against each other.
4. FLOW IDENTITIES:

       F(s) F(t) = F(s + t)            E(-t) E(t) = I
       C+(s + t) = F(s) C+(t) F(s)^T + C+(s)
       C(t) = delta_sqrt(t) C(1) delta_sqrt(t)

5. FACTORIZATIONS: `factor_spd` checks symmetry, takes a Cholesky factor and
   holds every squared pivot against the largest diagonal entry; a collapsing
   pivot raises NotPositiveDefinite. The factor carries logdet for the densities.
6. QUADRATIC FORMS: <E(-t) A E^T(-t) g, g> equals the A0 seminorm of
   sum_k t^k/k! B_1..B_k g^(k+1) (`chain_seminorm`).
"""

from dataclasses import dataclass
from math import factorial

import numpy as np
import scipy.linalg

from hypobound.core.errors import NotPositiveDefinite, NotSymmetric
from hypobound.core.model import ModelStructure, assemble_drift

PIVOT_TOL = 1e-14
SYMMETRY_TOL = 1e-10
GAUSS_POINTS = 8


# =============================================================================
# PolyMatrix
# =============================================================================


@dataclass(frozen=True)
class PolyMatrix:
    """Matrix with polynomial entries: sum_k coeffs[k] t^k."""

    coeffs: np.ndarray  # shape (degree + 1, rows, cols)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[1:]

    def __call__(self, t: float) -> np.ndarray:
        return self.evaluate(t)

    def evaluate(self, t: float) -> np.ndarray:
        # Horner
        out = self.coeffs[-1].copy()
        for coeff in self.coeffs[-2::-1]:
            out = out * t + coeff
        return out

    @property
    def T(self) -> "PolyMatrix":
        return PolyMatrix(np.transpose(self.coeffs, (0, 2, 1)).copy())

    def __matmul__(self, other: "PolyMatrix | np.ndarray") -> "PolyMatrix":
        if isinstance(other, np.ndarray):
            return PolyMatrix(self.coeffs @ other)
        rows, cols = self.shape[0], other.shape[1]
        out = np.zeros((self.degree + other.degree + 1, rows, cols))
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a @ b
        return PolyMatrix(out)

    def __rmatmul__(self, other: np.ndarray) -> "PolyMatrix":
        return PolyMatrix(other @ self.coeffs)

    def integrate(self) -> "PolyMatrix":
        """Antiderivative vanishing at t = 0."""
        out = np.zeros((self.degree + 2, *self.shape))
        for k, coeff in enumerate(self.coeffs):
            out[k + 1] = coeff / (k + 1)
        return PolyMatrix(out)


@dataclass(frozen=True)
class SpdFactorization:
    """Cholesky factor L (L L^T = matrix) and log-determinant."""

    matrix: np.ndarray
    lower: np.ndarray
    logdet: float


# =============================================================================
# Propagators and covariances
# =============================================================================


def propagator(model: ModelStructure, sign: int) -> PolyMatrix:
    """
    exp(sign * t B^T) as an exact polynomial matrix.

    sign = -1 gives E(t); sign = +1 gives the SDE mean flow F(t).
    """
    if sign not in (-1, 1):
        raise ValueError(f"sign must be -1 or +1, got {sign}")
    drift = assemble_drift(model)
    coeffs = np.zeros((model.r + 1, model.N, model.N))
    power = np.eye(model.N)
    for k in range(model.r + 1):
        coeffs[k] = (sign**k) * power / factorial(k)
        power = power @ drift
    return PolyMatrix(coeffs)


def _covariance(model: ModelStructure, sign: int) -> PolyMatrix:
    """
    Closed form of int_0^t exp(sign s B^T) A exp(sign s B^T)^T ds.

    Block (k2, k1) is sign^(k1+k2) t^(k1+k2+1) / (k1! k2! (k1+k2+1))
    (B_1..B_k2)^T A0 (B_1..B_k1).
    """
    chains = model.chain_products()
    slices = model.block_slices
    coeffs = np.zeros((2 * model.r + 2, model.N, model.N))
    for k1 in range(model.r + 1):
        for k2 in range(model.r + 1):
            degree = k1 + k2 + 1
            scale = sign ** (k1 + k2) / (factorial(k1) * factorial(k2) * degree)
            coeffs[degree][slices[k2], slices[k1]] = scale * (chains[k2].T @ model.A0 @ chains[k1])
    return PolyMatrix(coeffs)


def covariance_paper(model: ModelStructure) -> PolyMatrix:
    """C(t) = int_0^t E(s) A E(s)^T ds, the covariance of the closed-form kernel."""
    return _covariance(model, -1)


def covariance_sde(model: ModelStructure) -> PolyMatrix:
    """C+(t) = int_0^t F(s) A F(s)^T ds, the endpoint covariance of the SDE."""
    return _covariance(model, +1)


def lyapunov_integral(model: ModelStructure, sign: int) -> PolyMatrix:
    """Same integral as the closed forms, built from the propagator by exact integration."""
    flow = propagator(model, sign)
    return ((flow @ model.diffusion_matrix) @ flow.T).integrate()


def covariance_quadrature(model: ModelStructure, t: float, panels: int = 1) -> np.ndarray:
    """Composite 8-point Gauss-Legendre approximation of int_0^t E(s) A E(s)^T ds."""
    if panels < 1:
        raise ValueError(f"panels must be at least 1, got {panels}")
    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_POINTS)
    e = propagator(model, -1)
    a = model.diffusion_matrix
    edges = np.linspace(0.0, t, panels + 1)
    total = np.zeros((model.N, model.N))
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        for node, weight in zip(nodes, weights):
            es = e(half * node + 0.5 * (hi + lo))
            total += weight * half * (es @ a @ es.T)
    return 0.5 * (total + total.T)


# =============================================================================
# Factorizations
# =============================================================================


def factor_spd(m: np.ndarray) -> SpdFactorization:
    """Cholesky factorization with a relative pivot threshold."""
    m = np.asarray(m, dtype=float)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * scale:
        raise NotSymmetric("matrix is not symmetric")
    m = 0.5 * (m + m.T)

    max_diag = float(np.max(np.diag(m)))
    if max_diag <= 0.0:
        raise NotPositiveDefinite("matrix has no positive diagonal entry")
    try:
        lower = scipy.linalg.cholesky(m, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky factorization failed: {exc}") from exc

    pivots = np.diag(lower) ** 2
    if np.min(pivots) < PIVOT_TOL * max_diag:
        raise NotPositiveDefinite(f"pivot {np.min(pivots):.3e} below {PIVOT_TOL:.0e} x max diagonal {max_diag:.3e}")
    return SpdFactorization(matrix=m, lower=lower, logdet=float(2.0 * np.sum(np.log(np.diag(lower)))))


def inverse_spd(f: SpdFactorization) -> np.ndarray:
    """Inverse via two triangular solves, symmetrized."""
    inv = scipy.linalg.cho_solve((f.lower, True), np.eye(f.matrix.shape[0]))
    return 0.5 * (inv + inv.T)


def min_eigenvalue(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(m)[0])


# =============================================================================
# Quadratic forms
# =============================================================================


def weighted_form_matrix(model: ModelStructure, t: float, sign: int) -> np.ndarray:
    """E(sign t) A E(sign t)^T."""
    e = propagator(model, -1)(sign * t)
    return e @ model.diffusion_matrix @ e.T


def weighted_form(model: ModelStructure, t: float, sign: int, g: np.ndarray) -> float:
    """<E(sign t) A E^T(sign t) g, g>."""
    g = np.asarray(g, dtype=float)
    return float(g @ weighted_form_matrix(model, t, sign) @ g)


def chain_seminorm(model: ModelStructure, t: float, g: np.ndarray) -> float:
    """|| sum_k t^k/k! B_1..B_k g^(k+1) ||^2_A0, the other side of the identity for weighted_form(sign=-1)."""
    g = np.asarray(g, dtype=float)
    combined = np.zeros(model.dims[0])
    for k, (chain, block) in enumerate(zip(model.chain_products(), model.block_slices)):
        combined += (t**k / factorial(k)) * (chain @ g[block])
    return float(combined @ model.A0 @ combined)


def sign_conjugation(model: ModelStructure) -> np.ndarray:
    """S = diag((-1)^k I_mk)."""
    return np.diag(np.concatenate([np.full(m, (-1.0) ** k) for k, m in enumerate(model.dims)]))
