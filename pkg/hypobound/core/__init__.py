"""
Core module: model structure, exact matrix functions, Gaussian laws,
couplings, test functions, Monte Carlo estimators and inequality checks.
"""

from hypobound.core.estimator import Estimate, McConfig
from hypobound.core.model import ModelStructure, validate_structure
from hypobound.core.reports import CheckReport, InequalityId, SuiteReport, Variant, Verdict
from hypobound.core.testfns import TestFunction, make_testfn

__all__ = [
    "Estimate",
    "McConfig",
    "ModelStructure",
    "validate_structure",
    "CheckReport",
    "InequalityId",
    "SuiteReport",
    "Variant",
    "Verdict",
    "TestFunction",
    "make_testfn",
]
