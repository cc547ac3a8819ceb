"""Numerical toolkit for the two-player bias-variance game."""

from .distributions import FAMILIES, Family, Strategy, cdf, pdf, sample, strategy_pdf
from .game import GameConfig, RoundOutcome, is_ir, one_player_utility, round_payoffs
from .quadrature import QuadratureError, QuadratureSpec

__version__ = "0.1.0"

__all__ = [
    "FAMILIES", "Family", "Strategy", "cdf", "pdf", "sample", "strategy_pdf",
    "GameConfig", "RoundOutcome", "is_ir", "one_player_utility", "round_payoffs",
    "QuadratureError", "QuadratureSpec", "__version__",
]
