"""
Test Functions

Analytic functions with exact gradients and the hypothesis flags the
inequality checks look at:

    linear            a^T x + b                             unbounded
    quadratic         x^T Q x + a^T x + c                   unbounded
    logistic          s / (1 + exp(-<a,x> - b)) + delta     in [delta, s + delta]
    exp-neg-quadratic s exp(-(x-c)^T Q (x-c)) + delta       in [delta, s + delta]
    shifted-positive  delta + s (1 + cos(<a,x> + b)) / 2    in [delta, s + delta]

All evaluate on one point (N,) or a batch (n, N). Polynomial kinds can be
handed to the exact moment oracle through `to_polynomial()`.
"""

from abc import ABC, abstractmethod
from collections.abc import Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
import sympy as sp

from hypobound.core.errors import BadParams, DimensionMismatch, MissingGradient
from hypobound.core.kernel import as_poly, state_symbols


class TestFnKind(str, Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    LOGISTIC = "logistic"
    EXP_NEG_QUADRATIC = "exp-neg-quadratic"
    SHIFTED_POSITIVE = "shifted-positive"


@dataclass(frozen=True)
class HypothesisFlags:
    bounded: bool = False
    positive: bool = False
    lower_bound: float | None = None
    upper_bound: float | None = None
    globally_lipschitz: bool = False
    lipschitz_constant: float | None = None


# =============================================================================
# Base class
# =============================================================================


class TestFunction(ABC):
    """Evaluatable f with exact gradient and hypothesis metadata."""

    __test__ = False  # keep pytest from collecting this class

    kind: TestFnKind

    def __init__(self, dim: int, params: Mapping[str, Any], props: HypothesisFlags):
        self.dim = dim
        self.params = dict(params)
        self.props = props

    def _check(self, x: np.ndarray) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"{self.kind.value} function expects dimension {self.dim}, got {x.shape[-1]}")
        return np.atleast_2d(x), x.ndim == 1

    def evaluate(self, x: np.ndarray) -> np.ndarray | float:
        points, single = self._check(x)
        values = self._value(points)
        return float(values[0]) if single else values

    def gradient(self, x: np.ndarray) -> np.ndarray:
        points, single = self._check(x)
        grads = self._gradient(points)
        return grads[0] if single else grads

    def __call__(self, x: np.ndarray) -> np.ndarray | float:
        return self.evaluate(x)

    @abstractmethod
    def _value(self, x: np.ndarray) -> np.ndarray: ...

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        raise MissingGradient(f"{self.kind.value} function has no analytic gradient")

    def to_polynomial(self) -> sp.Poly:
        raise BadParams(f"{self.kind.value} function is not a polynomial")

    @property
    def is_polynomial(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


# =============================================================================
# Kinds
# =============================================================================


class LinearFn(TestFunction):
    kind = TestFnKind.LINEAR

    def __init__(self, a: np.ndarray, b: float = 0.0):
        self.a = np.asarray(a, dtype=float)
        self.b = float(b)
        norm = float(np.linalg.norm(self.a))
        if norm == 0.0:
            # constant function
            props = HypothesisFlags(
                bounded=True,
                positive=self.b > 0,
                lower_bound=self.b,
                upper_bound=self.b,
                globally_lipschitz=True,
                lipschitz_constant=0.0,
            )
        else:
            props = HypothesisFlags(globally_lipschitz=True, lipschitz_constant=norm)
        super().__init__(self.a.size, {"a": self.a.tolist(), "b": self.b}, props)

    def _value(self, x):
        return x @ self.a + self.b

    def _gradient(self, x):
        return np.broadcast_to(self.a, x.shape).copy()

    def to_polynomial(self) -> sp.Poly:
        x = state_symbols(self.dim)
        return as_poly(sum(float(ai) * xi for ai, xi in zip(self.a, x)) + self.b, self.dim)

    @property
    def is_polynomial(self) -> bool:
        return True


class QuadraticFn(TestFunction):
    kind = TestFnKind.QUADRATIC

    def __init__(self, q: np.ndarray, a: np.ndarray | None = None, c: float = 0.0):
        q = np.atleast_2d(np.asarray(q, dtype=float))
        if q.shape[0] != q.shape[1]:
            raise BadParams(f"Q must be square, got {q.shape}")
        self.q = 0.5 * (q + q.T)
        self.a = np.zeros(q.shape[0]) if a is None else np.asarray(a, dtype=float)
        if self.a.shape != (q.shape[0],):
            raise BadParams(f"a has shape {self.a.shape}, expected ({q.shape[0]},)")
        self.c = float(c)
        lipschitz = not np.any(self.q)
        props = HypothesisFlags(
            globally_lipschitz=lipschitz, lipschitz_constant=float(np.linalg.norm(self.a)) if lipschitz else None
        )
        super().__init__(q.shape[0], {"Q": self.q.tolist(), "a": self.a.tolist(), "c": self.c}, props)

    def _value(self, x):
        return np.einsum("ni,ij,nj->n", x, self.q, x) + x @ self.a + self.c

    def _gradient(self, x):
        return 2.0 * x @ self.q + self.a

    def to_polynomial(self) -> sp.Poly:
        x = sp.Matrix(state_symbols(self.dim))
        form = (x.T * sp.Matrix(self.q.tolist()) * x)[0, 0] + (sp.Matrix(self.a.tolist()).T * x)[0, 0]
        return as_poly(form + self.c, self.dim)

    @property
    def is_polynomial(self) -> bool:
        return True


class LogisticFn(TestFunction):
    kind = TestFnKind.LOGISTIC

    def __init__(self, a: np.ndarray, b: float = 0.0, s: float = 1.0, delta: float = 0.0):
        self.a = np.asarray(a, dtype=float)
        self.b, self.s, self.delta = float(b), float(s), float(delta)
        if self.s <= 0:
            raise BadParams(f"logistic scale s must be positive, got {self.s}")
        if self.delta < 0:
            raise BadParams(f"logistic shift delta must be nonnegative, got {self.delta}")
        props = HypothesisFlags(
            bounded=True,
            positive=self.delta > 0,
            lower_bound=self.delta,
            upper_bound=self.s + self.delta,
            globally_lipschitz=True,
            lipschitz_constant=self.s * float(np.linalg.norm(self.a)) / 4.0,
        )
        super().__init__(self.a.size, {"a": self.a.tolist(), "b": self.b, "s": self.s, "delta": self.delta}, props)

    def _sigmoid(self, x):
        return 0.5 * (1.0 + np.tanh(0.5 * (x @ self.a + self.b)))

    def _value(self, x):
        return self.s * self._sigmoid(x) + self.delta

    def _gradient(self, x):
        p = self._sigmoid(x)
        return (self.s * p * (1.0 - p))[:, None] * self.a


class ExpNegQuadraticFn(TestFunction):
    kind = TestFnKind.EXP_NEG_QUADRATIC

    def __init__(self, q: np.ndarray, center: np.ndarray | None = None, s: float = 1.0, delta: float = 0.0):
        q = np.atleast_2d(np.asarray(q, dtype=float))
        self.q = 0.5 * (q + q.T)
        eigvals = np.linalg.eigvalsh(self.q)
        if eigvals[0] < -1e-12:
            raise BadParams(f"Q must be positive semidefinite, smallest eigenvalue {eigvals[0]:.3e}")
        self.center = np.zeros(q.shape[0]) if center is None else np.asarray(center, dtype=float)
        self.s, self.delta = float(s), float(delta)
        if self.s <= 0 or self.delta < 0:
            raise BadParams("exp-neg-quadratic needs s > 0 and delta >= 0")
        # max_y ||2 Q y|| exp(-y^T Q y) = sqrt(2 lambda_max / e)
        props = HypothesisFlags(
            bounded=True,
            positive=self.delta > 0,
            lower_bound=self.delta,
            upper_bound=self.s + self.delta,
            globally_lipschitz=True,
            lipschitz_constant=self.s * float(np.sqrt(2.0 * max(eigvals[-1], 0.0) / np.e)),
        )
        params = {"Q": self.q.tolist(), "center": self.center.tolist(), "s": self.s, "delta": self.delta}
        super().__init__(q.shape[0], params, props)

    def _bump(self, x):
        y = x - self.center
        return self.s * np.exp(-np.einsum("ni,ij,nj->n", y, self.q, y))

    def _value(self, x):
        return self._bump(x) + self.delta

    def _gradient(self, x):
        return -2.0 * self._bump(x)[:, None] * ((x - self.center) @ self.q)


class ShiftedPositiveFn(TestFunction):
    kind = TestFnKind.SHIFTED_POSITIVE

    def __init__(self, a: np.ndarray, b: float = 0.0, s: float = 1.0, delta: float = 0.1):
        self.a = np.asarray(a, dtype=float)
        self.b, self.s, self.delta = float(b), float(s), float(delta)
        if self.delta <= 0:
            raise BadParams(f"shifted-positive needs delta > 0, got {self.delta}")
        if self.s <= 0:
            raise BadParams(f"shifted-positive needs s > 0, got {self.s}")
        props = HypothesisFlags(
            bounded=True,
            positive=True,
            lower_bound=self.delta,
            upper_bound=self.s + self.delta,
            globally_lipschitz=True,
            lipschitz_constant=0.5 * self.s * float(np.linalg.norm(self.a)),
        )
        super().__init__(self.a.size, {"a": self.a.tolist(), "b": self.b, "s": self.s, "delta": self.delta}, props)

    def _value(self, x):
        return self.delta + 0.5 * self.s * (1.0 + np.cos(x @ self.a + self.b))

    def _gradient(self, x):
        return (-0.5 * self.s * np.sin(x @ self.a + self.b))[:, None] * self.a


# =============================================================================
# Factory
# =============================================================================

_FACTORIES = {
    TestFnKind.LINEAR: (LinearFn, {"a": "a", "b": "b"}),
    TestFnKind.QUADRATIC: (QuadraticFn, {"Q": "q", "a": "a", "c": "c"}),
    TestFnKind.LOGISTIC: (LogisticFn, {"a": "a", "b": "b", "s": "s", "delta": "delta"}),
    TestFnKind.EXP_NEG_QUADRATIC: (ExpNegQuadraticFn, {"Q": "q", "center": "center", "s": "s", "delta": "delta"}),
    TestFnKind.SHIFTED_POSITIVE: (ShiftedPositiveFn, {"a": "a", "b": "b", "s": "s", "delta": "delta"}),
}

_REQUIRED = {
    TestFnKind.LINEAR: {"a"},
    TestFnKind.QUADRATIC: {"Q"},
    TestFnKind.LOGISTIC: {"a"},
    TestFnKind.EXP_NEG_QUADRATIC: {"Q"},
    TestFnKind.SHIFTED_POSITIVE: {"a", "delta"},
}


def make_testfn(kind: TestFnKind | str, params: Mapping[str, Any]) -> TestFunction:
    """
    Build a test function from its kind and a parameter mapping.

    Raises:
        BadParams: unknown kind, unknown or missing parameter, or values
                   inconsistent with the kind.
    """
    try:
        kind = TestFnKind(kind)
    except ValueError as exc:
        raise BadParams(f"unknown test function kind {kind!r}") from exc

    cls, names = _FACTORIES[kind]
    unknown = set(params) - set(names)
    if unknown:
        raise BadParams(f"{kind.value} does not accept parameters {sorted(unknown)}")
    missing = _REQUIRED[kind] - set(params)
    if missing:
        raise BadParams(f"{kind.value} requires parameters {sorted(missing)}")

    kwargs = {names[key]: value for key, value in params.items()}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise BadParams(f"{kind.value}: {exc}") from exc


def evaluate(f: TestFunction, x: np.ndarray) -> np.ndarray | float:
    return f.evaluate(x)


def gradient(f: TestFunction, x: np.ndarray) -> np.ndarray:
    return f.gradient(x)


def finite_difference_gradient(f: TestFunction, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central differences at a single point."""
    x = np.asarray(x, dtype=float)
    steps = h * np.eye(x.size)
    return np.array([(f(x + e) - f(x - e)) / (2.0 * h) for e in steps])
