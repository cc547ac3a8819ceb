"""Payoff rules of the two-player bias-variance game."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .distributions import Strategy

TIE_RULES = ("split-expected", "random-half")
COMPARISONS = ("magnitude", "signed")
IR_SLACK = 1e-12


@dataclass(frozen=True)
class GameConfig:
    """Reward, tie handling and strategy-class constraint for one game.

    ``comparison="magnitude"`` makes the player with the smaller ``|a_i|`` win;
    ``"signed"`` uses the raw realizations instead.
    """

    reward: float = 1.0
    tie_rule: str = "split-expected"
    frontier: bool = False
    comparison: str = "magnitude"

    def __post_init__(self):
        object.__setattr__(self, "reward", float(self.reward))
        if not self.reward > 0:
            raise ValueError(f"reward must be positive, got {self.reward}")
        if self.tie_rule not in TIE_RULES:
            raise ValueError(f"tie_rule must be one of {TIE_RULES}, got {self.tie_rule!r}")
        if self.comparison not in COMPARISONS:
            raise ValueError(f"comparison must be one of {COMPARISONS}, got {self.comparison!r}")

    def admit(self, strategy: Strategy) -> Strategy:
        if self.frontier and abs(strategy.error - 1.0) > 1e-9:
            raise ValueError(
                f"strategy off the unit error frontier (mu^2 + sigma^2 = {strategy.error!r})"
            )
        return strategy

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "GameConfig":
        known = {"reward", "tie_rule", "frontier", "comparison"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown GameConfig keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "GameConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class RoundOutcome:
    draws: tuple[float, float]
    winner: Optional[int]  # 1, 2, or None on a tie
    payoffs: tuple[float, float]


def _keys(a1, a2, comparison):
    if comparison == "magnitude":
        return np.abs(a1), np.abs(a2)
    return np.asarray(a1, dtype=float), np.asarray(a2, dtype=float)


def payoffs(a1, a2, config: GameConfig, rng: Optional[np.random.Generator] = None):
    """Vectorized payoffs for arrays of realizations; returns ``(p1, p2)``.

    The random-half tie rule needs ``rng``; one uniform is drawn per round
    so the stream position does not depend on how many ties occur.
    """
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    k1, k2 = _keys(a1, a2, config.comparison)
    win1 = config.reward - a1 * a1
    win2 = config.reward - a2 * a2
    p1 = np.where(k1 < k2, win1, 0.0)
    p2 = np.where(k2 < k1, win2, 0.0)
    tie = k1 == k2
    if config.tie_rule == "split-expected":
        p1 = np.where(tie, 0.5 * win1, p1)
        p2 = np.where(tie, 0.5 * win2, p2)
    else:
        if rng is None:
            raise ValueError("random-half tie rule needs a random stream")
        coin = rng.random(a1.shape) < 0.5
        p1 = np.where(tie & coin, win1, p1)
        p2 = np.where(tie & ~coin, win2, p2)
    return p1, p2


def round_payoffs(a1: float, a2: float, config: GameConfig,
                  rng: Optional[np.random.Generator] = None) -> RoundOutcome:
    a1, a2 = float(a1), float(a2)
    k1, k2 = _keys(a1, a2, config.comparison)
    if config.tie_rule == "random-half":
        if rng is None:
            raise ValueError("random-half tie rule needs a random stream")
        coin = rng.random() < 0.5
    if k1 < k2:
        winner = 1
    elif k2 < k1:
        winner = 2
    elif config.tie_rule == "random-half":
        winner = 1 if coin else 2
    else:
        half = 0.5 * (config.reward - a1 * a1)
        return RoundOutcome((a1, a2), None, (half, 0.5 * (config.reward - a2 * a2)))
    pay = (config.reward - a1 * a1, 0.0) if winner == 1 else (0.0, config.reward - a2 * a2)
    return RoundOutcome((a1, a2), winner, pay)


def one_player_utility(strategy: Strategy) -> float:
    return 1.0 - strategy.mu**2 - strategy.sigma**2


def is_ir(strategy: Strategy, slack: float = IR_SLACK) -> bool:
    return strategy.mu**2 + strategy.sigma**2 <= 1.0 + slack
