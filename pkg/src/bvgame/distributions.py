"""Standardized base distributions and location-scale strategies.

Every family is scaled to mean 0 and variance 1, so a strategy
``sigma * Z + mu`` has bias ``mu`` and variance ``sigma**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)

LAPLACE_SCALE = 1.0 / SQRT2
LOGISTIC_SCALE = SQRT3 / math.pi


class Family(str, Enum):
    NORMAL = "normal"
    LAPLACE = "laplace"
    LOGISTIC = "logistic"
    UNIFORM = "uniform"
    TRIANGLE = "triangle"

    @classmethod
    def parse(cls, name: "str | Family") -> "Family":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown family {name!r}; valid families: {valid}") from None

    @property
    def support(self) -> tuple[float, float]:
        if self is Family.UNIFORM:
            return (-SQRT3, SQRT3)
        if self is Family.TRIANGLE:
            return (-SQRT6, SQRT6)
        return (-math.inf, math.inf)

    @property
    def kinks(self) -> tuple[float, ...]:
        """Interior points (standardized units) where the pdf is not smooth."""
        if self in (Family.LAPLACE, Family.TRIANGLE):
            return (0.0,)
        return ()

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self is Family.NORMAL:
            out = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        elif self is Family.LAPLACE:
            out = np.exp(-np.abs(x) / LAPLACE_SCALE) / (2.0 * LAPLACE_SCALE)
        elif self is Family.LOGISTIC:
            # symmetric form avoids overflow for large |x|
            e = np.exp(-np.abs(x) / LOGISTIC_SCALE)
            out = e / (LOGISTIC_SCALE * (1.0 + e) ** 2)
        elif self is Family.UNIFORM:
            out = np.where(np.abs(x) <= SQRT3, 1.0 / (2.0 * SQRT3), 0.0)
        else:
            out = np.clip(SQRT6 - np.abs(x), 0.0, None) / 6.0
        return out[()] if out.ndim == 0 else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self is Family.NORMAL:
            out = special.ndtr(x)
        elif self is Family.LAPLACE:
            half = 0.5 * np.exp(-np.abs(x) / LAPLACE_SCALE)
            out = np.where(x < 0, half, 1.0 - half)
        elif self is Family.LOGISTIC:
            out = special.expit(x / LOGISTIC_SCALE)
        elif self is Family.UNIFORM:
            out = np.clip((x + SQRT3) / (2.0 * SQRT3), 0.0, 1.0)
        else:
            t = np.clip(SQRT6 - np.abs(x), 0.0, None)
            tail = t * t / 12.0
            out = np.where(x < 0, tail, 1.0 - tail)
        return out[()] if out.ndim == 0 else out

    def ppf(self, p):
        """Inverse cdf on (0, 1)."""
        p = np.asarray(p, dtype=float)
        if self is Family.NORMAL:
            out = special.ndtri(p)
        elif self is Family.LAPLACE:
            out = np.where(
                p < 0.5,
                LAPLACE_SCALE * np.log(2.0 * p),
                -LAPLACE_SCALE * np.log(2.0 * (1.0 - p)),
            )
        elif self is Family.LOGISTIC:
            out = LOGISTIC_SCALE * special.logit(p)
        elif self is Family.UNIFORM:
            out = SQRT3 * (2.0 * p - 1.0)
        else:
            out = np.where(
                p < 0.5,
                np.sqrt(12.0 * p) - SQRT6,
                SQRT6 - np.sqrt(12.0 * (1.0 - p)),
            )
        return out[()] if out.ndim == 0 else out


FAMILIES = tuple(Family)


class DegenerateStrategyError(ValueError):
    """A point-mass strategy was asked for a density."""


@dataclass(frozen=True)
class Strategy:
    """The error distribution ``sigma * Z + mu``; ``sigma == 0`` is a point mass."""

    family: Family
    mu: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if not math.isfinite(self.mu) or not math.isfinite(self.sigma):
            raise ValueError("mu and sigma must be finite")

    @classmethod
    def frontier(cls, family, mu: float) -> "Strategy":
        """Strategy on the unit error frontier, ``sigma = sqrt(1 - mu**2)``."""
        mu = float(mu)
        if not 0.0 <= mu <= 1.0:
            raise ValueError(f"frontier mu must lie in [0, 1], got {mu}")
        return cls(family, mu, math.sqrt(1.0 - mu * mu))

    @property
    def error(self) -> float:
        return self.mu**2 + self.sigma**2

    @property
    def is_point_mass(self) -> bool:
        return self.sigma == 0.0

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.family.support
        return (self.mu + self.sigma * lo, self.mu + self.sigma * hi)

    def pdf(self, x):
        return strategy_pdf(self, x)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_point_mass:
            out = np.where(x >= self.mu, 1.0, 0.0)
            return out[()] if out.ndim == 0 else out
        return self.family.cdf((x - self.mu) / self.sigma)

    def to_dict(self) -> dict:
        return {"family": self.family.value, "mu": self.mu, "sigma": self.sigma}


def pdf(family, x):
    return Family.parse(family).pdf(x)


def cdf(family, x):
    return Family.parse(family).cdf(x)


def strategy_pdf(strategy: Strategy, x):
    if strategy.is_point_mass:
        raise DegenerateStrategyError("a point-mass strategy has no density")
    return strategy.family.pdf((np.asarray(x, dtype=float) - strategy.mu) / strategy.sigma) / strategy.sigma


def sample(strategy: Strategy, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` values of ``sigma * Z + mu`` by inverse-cdf transform of one uniform stream."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    u = rng.random(n)
    if strategy.is_point_mass:
        return np.full(n, strategy.mu)
    # random() lies in [0, 1); map 0 to the smallest positive double
    u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
    return strategy.mu + strategy.sigma * strategy.family.ppf(u)
