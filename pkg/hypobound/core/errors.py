"""Error hierarchy shared by every hypobound module."""


class HypoboundError(Exception):
    """Base class for all library errors."""


# =============================================================================
# Model structure
# =============================================================================


class DimensionMismatch(HypoboundError):
    """Block shapes, vector lengths or point dimensions are inconsistent."""


class RankDeficient(HypoboundError):
    """Some B_k is below full column rank."""


class NotMonotone(HypoboundError):
    """Block dimensions m_0 >= m_1 >= ... >= m_r do not hold."""


class NotPositive(HypoboundError):
    """A quantity required to be strictly positive is not (A0, a test function, ...)."""


class NotSymmetric(HypoboundError):
    """A matrix required to be symmetric is not."""


class InconsistentSigma(HypoboundError):
    """Both A0 and sigma were supplied but sigma sigma^T differs from A0."""


class NonPositiveLambda(HypoboundError):
    """Dilation parameter must be strictly positive."""


# =============================================================================
# Linear algebra and oracles
# =============================================================================


class NotPositiveDefinite(HypoboundError):
    """Cholesky pivot fell below tolerance (t too small or invalid model)."""


class DegreeTooHigh(HypoboundError):
    """Polynomial exceeds the degree the moment oracle supports."""


# =============================================================================
# Test functions and inequality checks
# =============================================================================


class BadParams(HypoboundError):
    """Parameters are inconsistent with their kind (test functions, coupling directions)."""


class MissingGradient(HypoboundError):
    """An analytic gradient is required but not available."""


class MissingHypothesis(HypoboundError):
    """A test function lacks a hypothesis flag the inequality requires."""


class BadAlpha(HypoboundError):
    """Coupling / Harnack parameter alpha is invalid."""


class BoundViolated(HypoboundError):
    """A sampled value of f exceeds the declared upper bound."""


# =============================================================================
# Plans and reports
# =============================================================================


class ConfigParseError(HypoboundError):
    """Plan file is not well-formed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ConfigValidationError(HypoboundError):
    """Plan is well-formed but a field is invalid."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class ReportIoError(HypoboundError):
    """Report files could not be written or read."""
