"""
hypobound - Exact Kolmogorov-type hypoelliptic diffusions and numerical checks of
their gradient bounds and functional inequalities.

This package provides:
- Validated block structures (A0, sigma, B_1..B_r) for the operator 1/2 div(AD) + <x, BD>
- Exact polynomial matrix functions: propagators, covariances C(t) and C+(t)
- Exact Gaussian endpoint laws, sampling and a polynomial semigroup oracle
- Synchronous couplings with free parameters and an Euler trajectory oracle
- Monte Carlo semigroup estimators with standard errors
- One check per inequality (Bakry-Emery, Poincare, log-Sobolev, Harnack, Hamilton)
- A TOML-driven suite runner with JSON / CSV / SVG reports
"""

__version__ = "0.1.0"
