"""sigma-Brjuno functions ``B_sigma(x) = sum_j beta_{j-1}(x) x_j^(-1/sigma)``:
continued-fraction machinery, evaluation with enclosures, lower bounds,
minimiser localisation, certified margins and cusp scaling."""

from __future__ import annotations

__version__ = "0.1.0"

from .bounds import BoundContext, b_star, b_star_iterate, g, g_k, phi, verify_cylinder_dominance
from .brjuno import Enclosure, EvalReport, eval_enclosure, eval_periodic_exact, evaluate, partial_sum
from .cf import CFSpec, ConvergentTable, eta, expand, growth_exponent, parse_cfspec
from .errors import (
    BrjunoError,
    DomainError,
    InsufficientDecayError,
    PreconditionError,
    PrecisionExhaustedError,
    QuotientCapError,
    RationalInputError,
    SpecError,
)
from .minima import localize, monotonicity_checks, phase_scan, sigma_star

__all__ = [
    "BoundContext",
    "BrjunoError",
    "CFSpec",
    "ConvergentTable",
    "DomainError",
    "Enclosure",
    "EvalReport",
    "InsufficientDecayError",
    "PreconditionError",
    "PrecisionExhaustedError",
    "QuotientCapError",
    "RationalInputError",
    "SpecError",
    "b_star",
    "b_star_iterate",
    "eta",
    "eval_enclosure",
    "eval_periodic_exact",
    "evaluate",
    "expand",
    "g",
    "g_k",
    "growth_exponent",
    "localize",
    "monotonicity_checks",
    "parse_cfspec",
    "partial_sum",
    "phase_scan",
    "phi",
    "sigma_star",
    "verify_cylinder_dominance",
]
