"""
Model Structure - Kolmogorov-type Operators

The operator is L = 1/2 div(A D) + <x, B D> on R^N with

    A = [[A0, 0], [0, 0]]        B = block super-diagonal (B_1, ..., B_r)

where A0 is m0 x m0 and B_k is m_{k-1} x m_k of full column rank, with
m0 >= m1 >= ... >= mr >= 1. The associated diffusion solves

    dX_1 = sigma dW,    dX_{k+1} = B_k^T X_k dt   (k = 1..r)

with sigma sigma^T = A0. Everything downstream (propagators, covariances,
couplings) is derived from a validated ModelStructure.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from hypobound.core.errors import (
    DimensionMismatch,
    InconsistentSigma,
    NonPositiveLambda,
    NotMonotone,
    NotPositive,
    NotSymmetric,
    RankDeficient,
)
from hypobound.logs.logger import get_logger

logger = get_logger(__name__)

SIGMA_TOL = 1e-12
RANK_TOL = 1e-10
DEFINITE_TOL = 1e-10


# =============================================================================
# Domain types
# =============================================================================


@dataclass(frozen=True, eq=False)
class ModelStructure:
    """
    Validated block data defining the operator and its SDE.

    Build instances with `validate_structure`; the constructor does not check
    the invariants.
    """

    r: int
    dims: tuple[int, ...]
    A0: np.ndarray
    sigma: np.ndarray
    blocks: tuple[np.ndarray, ...]
    name: str = "model"

    @property
    def N(self) -> int:
        return int(sum(self.dims))

    @property
    def block_slices(self) -> list[slice]:
        """Index range of block k (k = 0..r) inside an N-vector."""
        starts = np.concatenate([[0], np.cumsum(self.dims)])
        return [slice(int(starts[k]), int(starts[k + 1])) for k in range(self.r + 1)]

    @property
    def diffusion_matrix(self) -> np.ndarray:
        """A: the N x N matrix with A0 in the top-left block."""
        a = np.zeros((self.N, self.N))
        a[: self.dims[0], : self.dims[0]] = self.A0
        return a

    def chain_products(self) -> list[np.ndarray]:
        """[B_1 ... B_k for k = 0..r]; the k = 0 entry is the m0 x m0 identity."""
        products = [np.eye(self.dims[0])]
        for b in self.blocks:
            products.append(products[-1] @ b)
        return products

    def to_raw(self) -> dict[str, Any]:
        """Plain row-major data accepted by `validate_structure`."""
        return {
            "name": self.name,
            "r": self.r,
            "dims": list(self.dims),
            "A0": self.A0.ravel().tolist(),
            "sigma": self.sigma.ravel().tolist(),
            "blocks": [b.ravel().tolist() for b in self.blocks],
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModelStructure):
            return NotImplemented
        return (
            self.r == other.r
            and self.dims == other.dims
            and np.array_equal(self.A0, other.A0)
            and np.array_equal(self.sigma, other.sigma)
            and all(np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks, strict=True))
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"ModelStructure(name={self.name!r}, r={self.r}, dims={self.dims})"


@dataclass(frozen=True)
class Dilation:
    """delta_lambda = diag(lambda I_m0, lambda^3 I_m1, ..., lambda^(2r+1) I_mr)."""

    lam: float
    diag: np.ndarray = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)

    def compose(self, other: "Dilation") -> "Dilation":
        return Dilation(lam=self.lam * other.lam, diag=self.diag * other.diag)


# =============================================================================
# Validation
# =============================================================================


def _as_matrix(value: Any, shape: tuple[int, int], name: str) -> np.ndarray:
    """Accept nested lists or row-major flat arrays of the expected shape."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1 and arr.size == shape[0] * shape[1]:
        arr = arr.reshape(shape)
    elif arr.ndim == 0 and shape == (1, 1):
        arr = arr.reshape(shape)
    if arr.shape != shape:
        raise DimensionMismatch(f"{name} has shape {arr.shape}, expected {shape}")
    return arr


def symmetric_sqrt(m: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric positive semidefinite matrix."""
    eigvals, eigvecs = np.linalg.eigh(m)
    root = (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.T
    return 0.5 * (root + root.T)


def validate_structure(raw: Mapping[str, Any] | ModelStructure) -> ModelStructure:
    """
    Validate raw model data and return an immutable ModelStructure.

    Args:
        raw: Mapping with keys `r`, `dims`, `blocks` and at least one of `A0`,
             `sigma` (matrices as nested lists or row-major flat arrays), and an
             optional `name`. A ModelStructure is revalidated through `to_raw()`.

    Returns:
        ModelStructure: the validated model. If only A0 is given, sigma is its
        symmetric square root; if only sigma is given, A0 = sigma sigma^T.

    Raises:
        DimensionMismatch, NotMonotone, RankDeficient, NotPositive, NotSymmetric,
        InconsistentSigma
    """
    if isinstance(raw, ModelStructure):
        raw = raw.to_raw()

    r = int(raw["r"])
    if r < 1:
        raise DimensionMismatch(f"r must be at least 1, got {r}")

    dims = tuple(int(m) for m in raw["dims"])
    if len(dims) != r + 1:
        raise DimensionMismatch(f"dims has {len(dims)} entries, expected r + 1 = {r + 1}")
    if any(m < 1 for m in dims):
        raise DimensionMismatch(f"block dimensions must be positive, got {dims}")
    if any(dims[k] < dims[k + 1] for k in range(r)):
        raise NotMonotone(f"dims must be nonincreasing, got {dims}")

    m0 = dims[0]
    a0_raw = raw.get("A0")
    sigma_raw = raw.get("sigma")
    if a0_raw is None and sigma_raw is None:
        raise DimensionMismatch("model needs A0 or sigma")

    if a0_raw is not None:
        a0 = _as_matrix(a0_raw, (m0, m0), "A0")
        scale = max(1.0, float(np.max(np.abs(a0))))
        if np.max(np.abs(a0 - a0.T)) > SIGMA_TOL * scale:
            raise NotSymmetric("A0 is not symmetric")
        a0 = 0.5 * (a0 + a0.T)
    else:
        sigma = _as_matrix(sigma_raw, (m0, m0), "sigma")
        a0 = sigma @ sigma.T
        a0 = 0.5 * (a0 + a0.T)

    eigvals = np.linalg.eigvalsh(a0)
    if eigvals[-1] <= 0.0 or eigvals[0] <= DEFINITE_TOL * eigvals[-1]:
        raise NotPositive(f"A0 is not positive definite: smallest eigenvalue {eigvals[0]:.3e}")

    if sigma_raw is not None:
        sigma = _as_matrix(sigma_raw, (m0, m0), "sigma")
        if a0_raw is not None:
            scale = max(1.0, float(np.max(np.abs(a0))))
            if np.max(np.abs(sigma @ sigma.T - a0)) > SIGMA_TOL * scale:
                raise InconsistentSigma("sigma sigma^T differs from A0")
    else:
        sigma = symmetric_sqrt(a0)

    blocks_raw = list(raw["blocks"])
    if len(blocks_raw) != r:
        raise DimensionMismatch(f"expected {r} blocks B_1..B_r, got {len(blocks_raw)}")

    blocks = []
    for k, b_raw in enumerate(blocks_raw, start=1):
        b = _as_matrix(b_raw, (dims[k - 1], dims[k]), f"B_{k}")
        singular = np.linalg.svd(b, compute_uv=False)
        if singular[-1] <= RANK_TOL * max(float(singular[0]), 1.0):
            raise RankDeficient(f"B_{k} is below full column rank: smallest singular value {singular[-1]:.3e}")
        blocks.append(b)

    model = ModelStructure(
        r=r, dims=dims, A0=a0, sigma=sigma, blocks=tuple(blocks), name=str(raw.get("name", "model"))
    )
    logger.debug("Validated %r", model)
    return model


# =============================================================================
# Operations
# =============================================================================


def assemble_drift(model: ModelStructure) -> np.ndarray:
    """
    B^T: strictly block lower triangular, with B_k^T in block (k, k-1).

    The SDE reads dX = B^T X dt + (sigma, 0, ..., 0)^T dW.
    """
    drift = np.zeros((model.N, model.N))
    slices = model.block_slices
    for k, b in enumerate(model.blocks, start=1):
        drift[slices[k], slices[k - 1]] = b.T
    return drift


def dilation(model: ModelStructure, lam: float) -> Dilation:
    """Anisotropic dilation with exponent 2k + 1 on block k."""
    if not lam > 0:
        raise NonPositiveLambda(f"dilation parameter must be positive, got {lam}")
    diag = np.concatenate([np.full(m, float(lam) ** (2 * k + 1)) for k, m in enumerate(model.dims)])
    return Dilation(lam=float(lam), diag=diag)


# =============================================================================
# Constructors
# =============================================================================


def kolmogorov_structure() -> ModelStructure:
    """Classical Kolmogorov operator: r = 1, A0 = B_1 = 1."""
    return validate_structure({"name": "kolmogorov", "r": 1, "dims": [1, 1], "A0": [1.0], "blocks": [[1.0]]})


def iterated_kolmogorov_structure(r: int, m: int = 1) -> ModelStructure:
    """Iterated Kolmogorov operator: A0 = B_1 = ... = B_r = I_m."""
    eye = np.eye(m).tolist()
    return validate_structure(
        {"name": f"iterated-r{r}-m{m}", "r": r, "dims": [m] * (r + 1), "A0": eye, "blocks": [eye] * r}
    )


def random_structure(rng: np.random.Generator, r_max: int = 3, max_block: int = 3, r: int | None = None) -> ModelStructure:
    """
    Draw a random valid model.

    dims are nonincreasing, A0 = G G^T + I/2 and the B_k are Gaussian (full
    column rank with probability one; redrawn otherwise).
    """
    r = int(rng.integers(1, r_max + 1)) if r is None else r
    dims = sorted((int(m) for m in rng.integers(1, max_block + 1, size=r + 1)), reverse=True)
    g = rng.normal(size=(dims[0], dims[0]))
    a0 = g @ g.T + 0.5 * np.eye(dims[0])
    while True:
        blocks = [rng.normal(size=(dims[k - 1], dims[k])) for k in range(1, r + 1)]
        if all(np.linalg.svd(b, compute_uv=False)[-1] > 1e-3 for b in blocks):
            break
    return validate_structure(
        {"name": f"random-r{r}-{'x'.join(map(str, dims))}", "r": r, "dims": dims, "A0": a0, "blocks": blocks}
    )


def model_dimension_check(model: ModelStructure, vectors: Sequence[np.ndarray], names: Sequence[str]) -> None:
    """Raise DimensionMismatch unless each vector has length N."""
    for vec, name in zip(vectors, names, strict=True):
        if np.shape(vec)[-1] != model.N:
            raise DimensionMismatch(f"{name} has dimension {np.shape(vec)[-1]}, model has N = {model.N}")
