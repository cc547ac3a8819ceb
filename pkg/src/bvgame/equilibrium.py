"""Utility curves, best responses and grid PNE search on the unit error frontier."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import analytic
from .distributions import Family, Strategy
from .engine import DEFAULT_QUAD, expected_utilities, expost_utilities
from .game import GameConfig
from .quadrature import QuadratureSpec

# values within this of the maximum count as tied; resolved toward smaller mu
BR_TIE_TOL = 1e-12


def frontier_mus(step: float = 0.01, include_one: bool = False) -> np.ndarray:
    n = int(round(1.0 / step))
    mus = np.round(np.arange(n + 1) * step, 12)
    mus = mus[mus <= 1.0]
    return mus if include_one else mus[mus < 1.0]


@dataclass(frozen=True)
class FrontierGrid:
    family: Family
    mus: tuple
    config: GameConfig = field(default_factory=lambda: GameConfig(frontier=True))

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        mus = tuple(float(m) for m in np.asarray(self.mus, dtype=float).ravel())
        if not mus:
            raise ValueError("grid needs at least one mu")
        if any(b <= a for a, b in zip(mus, mus[1:])):
            raise ValueError("grid mus must be strictly increasing")
        if mus[0] < 0 or mus[-1] > 1:
            raise ValueError("grid mus must lie in [0, 1]")
        object.__setattr__(self, "mus", mus)

    @classmethod
    def regular(cls, family, step: float = 0.01, config: Optional[GameConfig] = None,
                include_one: bool = False) -> "FrontierGrid":
        config = config or GameConfig(frontier=True)
        return cls(family, tuple(frontier_mus(step, include_one)), config)

    @property
    def mu_array(self) -> np.ndarray:
        return np.asarray(self.mus)

    @property
    def sigma_array(self) -> np.ndarray:
        m = self.mu_array
        return np.sqrt(np.clip(1.0 - m * m, 0.0, None))

    def strategy(self, mu: float) -> Strategy:
        return Strategy.frontier(self.family, mu)


@dataclass(frozen=True)
class UtilityCurve:
    kind: str  # "expost" or "expected"
    family: Family
    opponent: float  # realization a, or opponent mu_j
    reward: float
    mus: np.ndarray
    utilities: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.mus.tolist(), self.utilities.tolist()))

    def max_increase(self) -> float:
        """Largest rise between neighbouring grid points (<= 0 for a nonincreasing curve)."""
        if self.utilities.size < 2:
            return -np.inf
        return float(np.max(np.diff(self.utilities)))

    def is_nonincreasing(self, slack: float = 0.0) -> bool:
        return self.max_increase() <= slack

    def argmax(self, tie_tol: float = BR_TIE_TOL) -> float:
        return float(self.mus[_argmax_low(self.utilities, tie_tol)])

    @property
    def stem(self) -> str:
        opp = "a" if self.kind == "expost" else "muj"
        return f"{self.kind}_{self.family.value}_{opp}{self.opponent:g}_R{self.reward:g}"

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["mu_i", "utility"])
            for m, u in zip(self.mus.tolist(), self.utilities.tolist()):
                w.writerow([repr(m), repr(u)])
        return path

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "family": self.family.value,
            "opponent": self.opponent,
            "reward": self.reward,
            "mu_i": self.mus.tolist(),
            "utility": self.utilities.tolist(),
        }


def _argmax_low(values: np.ndarray, tie_tol: float) -> int:
    best = np.max(values)
    return int(np.flatnonzero(values >= best - tie_tol)[0])


def _use_closed_form(grid: FrontierGrid) -> bool:
    cfg = grid.config
    return grid.family is Family.NORMAL and cfg.reward == 1.0 and cfg.comparison == "magnitude"


def expost_curve(grid: FrontierGrid, a: float, quad: QuadratureSpec = DEFAULT_QUAD,
                 closed_form: Optional[bool] = None) -> UtilityCurve:
    """Ex post utility of every grid strategy against the fixed realization ``a``."""
    if a < 0:
        raise ValueError("realization a must be nonnegative")
    mus, sig = grid.mu_array, grid.sigma_array
    use_cf = _use_closed_form(grid) if closed_form is None else closed_form
    if use_cf:
        vals = np.zeros_like(mus)
        inner = mus < 1.0
        vals[inner] = analytic.expost_utility_normal(mus[inner], a)
        if np.any(~inner):
            vals[~inner] = expost_utilities(grid.family, mus[~inner], 0.0, a, grid.config, quad)
    else:
        vals = expost_utilities(grid.family, mus, sig, a, grid.config, quad)
    return UtilityCurve("expost", grid.family, float(a), grid.config.reward, mus, np.asarray(vals, dtype=float))


def expected_curve(grid: FrontierGrid, mu_j: float, quad: QuadratureSpec = DEFAULT_QUAD) -> UtilityCurve:
    """Expected utility of every grid strategy against the frontier strategy ``mu_j``."""
    if not 0.0 <= mu_j <= 1.0:
        raise ValueError("mu_j must lie in [0, 1]")
    opponent = Strategy.frontier(grid.family, mu_j)
    vals = expected_utilities(grid.family, grid.mu_array, grid.sigma_array, opponent, grid.config, quad)
    return UtilityCurve("expected", grid.family, float(mu_j), grid.config.reward, grid.mu_array, vals)


def best_response(grid: FrontierGrid, mu_j: float, quad: QuadratureSpec = DEFAULT_QUAD,
                  tie_tol: float = BR_TIE_TOL) -> float:
    return expected_curve(grid, mu_j, quad).argmax(tie_tol)


def utility_table(grid: FrontierGrid, quad: QuadratureSpec = DEFAULT_QUAD, threads: int = 1) -> np.ndarray:
    """``U[i, j]`` = expected utility of grid strategy ``i`` against grid strategy ``j``."""
    def column(mu_j):
        return expected_curve(grid, mu_j, quad).utilities

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(column, grid.mus))
    else:
        cols = [column(m) for m in grid.mus]
    return np.column_stack(cols)


@dataclass
class PNEResult:
    family: Family
    reward: float
    mus: np.ndarray
    equilibria: list  # list of (mu_1, mu_2)
    best_response_table: dict  # mu_j -> mu_i*
    table: Optional[np.ndarray] = None

    @property
    def symmetric(self) -> list:
        return [e for e in self.equilibria if e[0] == e[1]]

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "reward": self.reward,
            "grid": self.mus.tolist(),
            "equilibria": [list(e) for e in self.equilibria],
            "best_response_table": [
                {"mu_j": k, "mu_i_star": v} for k, v in self.best_response_table.items()
            ],
        }

    def write_json(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def find_pne(grid: FrontierGrid, quad: QuadratureSpec = DEFAULT_QUAD, threads: int = 1,
             tie_tol: float = BR_TIE_TOL) -> PNEResult:
    """All grid pairs that are mutual best responses.

    Both players share the strategy class, so one utility table serves both:
    ``(m1, m2)`` is an equilibrium when ``m1`` is a best response to ``m2``
    and vice versa (best-response sets include near-ties within ``tie_tol``).
    """
    U = utility_table(grid, quad, threads)
    best = U.max(axis=0)
    is_br = U >= best[None, :] - tie_tol  # is_br[i, j]: i best-responds to j
    mus = grid.mu_array
    eq = [
        (float(mus[i]), float(mus[j]))
        for i in range(mus.size) for j in range(mus.size)
        if is_br[i, j] and is_br[j, i]
    ]
    table = {float(mus[j]): float(mus[_argmax_low(U[:, j], tie_tol)]) for j in range(mus.size)}
    return PNEResult(grid.family, grid.config.reward, mus, eq, table, U)


def refinement_check(grid: FrontierGrid, pair, quad: QuadratureSpec = DEFAULT_QUAD) -> bool:
    """Does ``pair`` stay a mutual best response, to within one refined step, on a half-step grid?"""
    mus = grid.mu_array
    step = float(np.min(np.diff(mus))) if mus.size > 1 else 0.01
    fine = FrontierGrid.regular(grid.family, step / 2.0, grid.config)
    h = step / 2.0 + 1e-12
    m1, m2 = pair
    return (abs(best_response(fine, m2, quad) - m1) <= h
            and abs(best_response(fine, m1, quad) - m2) <= h)


def best_response_iteration(grid: FrontierGrid, start: float = 0.0, max_iter: int = 50,
                            quad: QuadratureSpec = DEFAULT_QUAD) -> list[float]:
    """Iterate ``mu <- BR(mu)`` from ``start``; returns the visited sequence."""
    seq = [float(start)]
    for _ in range(max_iter):
        nxt = best_response(grid, seq[-1], quad)
        if nxt in seq:
            seq.append(nxt)
            break
        seq.append(nxt)
    return seq
