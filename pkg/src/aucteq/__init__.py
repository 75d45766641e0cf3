"""Equilibria of full-information first-price auctions.

Verification, closed-form bounds, explicit constructions, grid LPs and
no-regret dynamics for coarse correlated and correlated equilibria.
"""

from .core import Atom, AuctionInstance, FiniteEquilibrium, OutcomeSummary, summarize
from .errors import (
    AuctEqError,
    ConstructionError,
    InvalidInputError,
    InvariantError,
    ParameterError,
    PreconditionError,
    ProblemSizeError,
    RangeError,
)
from .verify import DeviationPolicy, verify_ce, verify_cce

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "AuctionInstance",
    "FiniteEquilibrium",
    "OutcomeSummary",
    "summarize",
    "DeviationPolicy",
    "verify_cce",
    "verify_ce",
    "AuctEqError",
    "ConstructionError",
    "InvalidInputError",
    "InvariantError",
    "ParameterError",
    "PreconditionError",
    "ProblemSizeError",
    "RangeError",
]
