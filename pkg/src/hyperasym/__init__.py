"""Hyperasymptotic expansions for heat-type Cauchy problems.

Level-n expansions of solutions built from repeated optimal truncation of
Borel-sum integral representations, for the heat equation and for simple
pseudodifferential equations with monomial symbol, all verified against
direct-quadrature oracles.
"""

from .datum import AnalyticDatum, Direction, PoleTerm, SingularitySet, singular_distance
from .special import KernelParams, ecalle_kernel, gamma_moment, gamma_real, mittag_leffler

__all__ = [
    "AnalyticDatum",
    "Direction",
    "PoleTerm",
    "SingularitySet",
    "singular_distance",
    "KernelParams",
    "ecalle_kernel",
    "gamma_moment",
    "gamma_real",
    "mittag_leffler",
]

__version__ = "0.1.0"
