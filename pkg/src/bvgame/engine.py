"""Quadrature-based utilities for arbitrary families, and Monte Carlo play.

The quadrature path and the simulation path share nothing but the payoff
rule, so each serves as an oracle for the other.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .distributions import Family, Strategy, sample
from .game import GameConfig, payoffs
from .quadrature import QuadratureSpec, integrate_panels

DEFAULT_QUAD = QuadratureSpec()
DEFAULT_CONFIG = GameConfig()
SIM_BLOCK = 1 << 16


def _panels(lower, upper, extra):
    """Split ``[lower_k, upper_k]`` at every finite point of ``extra[k]`` inside it."""
    m = lower.size
    pts = np.column_stack([lower, upper] + ([extra] if extra.size else []))
    pts = np.where(np.isfinite(pts), pts, lower[:, None])
    pts = np.clip(pts, lower[:, None], np.maximum(lower, upper)[:, None])
    pts.sort(axis=1)
    lo, hi = pts[:, :-1], pts[:, 1:]
    owner = np.broadcast_to(np.arange(m)[:, None], lo.shape)
    keep = hi > lo
    return lo[keep], hi[keep], owner[keep]


def _inner_bounds(family: Family, mu, sigma, c, comparison, truncation):
    s_lo, s_hi = family.support
    sup_lo = mu + sigma * s_lo
    sup_hi = mu + sigma * s_hi
    if comparison == "magnitude":
        lower = np.maximum(-c, sup_lo)
        upper = np.minimum(c, sup_hi)
    else:
        floor = sup_lo if math.isfinite(s_lo) else mu - truncation * sigma
        lower = np.broadcast_to(floor, np.shape(c)).astype(float)
        upper = np.minimum(c, sup_hi)
    return lower, upper


def _expost_continuous(family: Family, mu, sigma, c, reward, comparison, quad):
    """E[(R - X^2) 1{X wins against c}] for X = sigma Z + mu with sigma > 0, batched."""
    mu, sigma, c = (np.ascontiguousarray(v, dtype=float) for v in np.broadcast_arrays(mu, sigma, c))
    shape = mu.shape
    mu, sigma, c = mu.ravel(), sigma.ravel(), c.ravel()
    lower, upper = _inner_bounds(family, mu, sigma, c, comparison, quad.outer_truncation)
    extra = [np.zeros_like(mu)] + [mu + sigma * k for k in family.kinks]
    lo, hi, owner = _panels(lower, upper, np.column_stack(extra))

    def integrand(x, o):
        s = sigma[o]
        return (reward - x * x) * family.pdf((x - mu[o]) / s) / s

    values, _ = integrate_panels(integrand, lo, hi, owner, mu.size, quad)
    return values.reshape(shape)


def _expost_point(mu, c, reward, comparison):
    wins = np.abs(mu) < np.abs(c) if comparison == "magnitude" else mu < c
    return np.where(wins, reward - mu * mu, 0.0)


def expost_utilities(family, mus, sigmas, a, config: GameConfig = DEFAULT_CONFIG,
                     quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """Vectorized :func:`expost_utility` over arrays of ``(mu, sigma)`` and realizations."""
    family = Family.parse(family)
    mus, sigmas, a = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(mus, sigmas, a))
    c = np.abs(a) if config.comparison == "magnitude" else a
    out = _expost_point(mus, c, config.reward, config.comparison)
    cont = sigmas > 0
    if np.any(cont):
        out = np.array(out, dtype=float)
        out[cont] = _expost_continuous(
            family, mus[cont], sigmas[cont], c[cont], config.reward, config.comparison, quad
        )
    return out


def expost_utility(strategy: Strategy, a: float, config: GameConfig = DEFAULT_CONFIG,
                   quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Expected payoff of ``strategy`` against a fixed opponent realization ``a``."""
    config.admit(strategy)
    return float(expost_utilities(strategy.family, strategy.mu, strategy.sigma, a, config, quad))


def _outer_breaks(fam_i: Family, mu_i, sig_i, fam_j: Family, mu_j, sig_j, comparison):
    cols = [np.zeros_like(mu_i), mu_j + 0 * mu_i]
    cols += [mu_j + sig_j * k + 0 * mu_i for k in fam_j.kinks]
    s_lo, s_hi = fam_i.support
    inner_pts = [mu_i + sig_i * k for k in fam_i.kinks]
    inner_pts += [mu_i + sig_i * e for e in (s_lo, s_hi) if math.isfinite(e)]
    for p in inner_pts:
        if comparison == "magnitude":
            cols += [np.abs(p), -np.abs(p)]
        else:
            cols.append(p)
    return np.column_stack(cols)


def _expected_continuous(fam_i: Family, mu_i, sig_i, fam_j: Family, mu_j, sig_j, config, quad):
    """Outer quadrature over the opponent's realization of the inner ex post utility."""
    n = mu_i.size
    T = quad.outer_truncation
    s_lo, s_hi = fam_j.support
    lower = np.maximum(mu_j - T * sig_j, mu_j + sig_j * s_lo) + 0 * mu_i
    upper = np.minimum(mu_j + T * sig_j, mu_j + sig_j * s_hi) + 0 * mu_i
    extra = _outer_breaks(fam_i, mu_i, sig_i, fam_j, mu_j, sig_j, config.comparison)
    lo, hi, owner = _panels(lower, upper, extra)
    mag = config.comparison == "magnitude"

    def inner(a, o):
        c = np.abs(a) if mag else a
        return _expost_continuous(fam_i, mu_i[o], sig_i[o], c, config.reward, config.comparison, quad)

    def integrand(a, o):
        s = sig_j[o] if np.ndim(sig_j) else sig_j
        m = mu_j[o] if np.ndim(mu_j) else mu_j
        return fam_j.pdf((a - m) / s) / s * inner(a, o)

    values, _ = integrate_panels(integrand, lo, hi, owner, n, quad)

    # first-order tail correction for families with unbounded support
    if not math.isfinite(s_lo):
        below = fam_j.cdf((lower - mu_j) / sig_j)
        above = 1.0 - fam_j.cdf((upper - mu_j) / sig_j)
        idx = np.arange(n)
        values = values + below * inner(lower, idx) + above * inner(upper, idx)
    return values


def expected_utilities(family, mus, sigmas, opponent: Strategy,
                       config: GameConfig = DEFAULT_CONFIG,
                       quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """Expected utility of each ``(mu_k, sigma_k)`` strategy of ``family`` against ``opponent``."""
    family = Family.parse(family)
    mus, sigmas = (np.asarray(v, dtype=float).ravel() for v in np.broadcast_arrays(mus, sigmas))
    R = config.reward
    mag = config.comparison == "magnitude"
    out = np.zeros(mus.size)
    point = sigmas == 0
    if opponent.is_point_mass:
        c = abs(opponent.mu) if mag else opponent.mu
        out = expost_utilities(family, mus, sigmas, c, config, quad).astype(float)
        key_i = np.abs(mus) if mag else mus
        tie = point & (key_i == c)
        # both tie rules have the same expectation
        out[tie] = 0.5 * (R - mus[tie] ** 2)
        return out
    if np.any(point):
        m = mus[point]
        if mag:
            beaten = 1.0 - (opponent.cdf(np.abs(m)) - opponent.cdf(-np.abs(m)))
        else:
            beaten = 1.0 - opponent.cdf(m)
        out[point] = (R - m * m) * beaten
    cont = ~point
    if np.any(cont):
        out[cont] = _expected_continuous(
            family, mus[cont], sigmas[cont], opponent.family,
            opponent.mu, opponent.sigma, config, quad,
        )
    return out


def expected_utility(strategy_i: Strategy, strategy_j: Strategy,
                     config: GameConfig = DEFAULT_CONFIG,
                     quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Expected payoff of player ``i`` when both players draw from their strategies."""
    config.admit(strategy_i)
    config.admit(strategy_j)
    return float(expected_utilities(
        strategy_i.family, strategy_i.mu, strategy_i.sigma, strategy_j, config, quad
    )[0])


@dataclass(frozen=True)
class SimulationResult:
    mean_payoffs: tuple[float, float]
    std_errors: tuple[float, float]
    rounds: int
    seed: int
    diff_std_error: float  # standard error of the per-round payoff difference

    def to_dict(self) -> dict:
        return asdict(self)


def block_stream(seed: int, block: int) -> np.random.Generator:
    """Independent stream for one block of rounds, derived from the root seed by counter."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _simulate_block(s1, s2, config, seed, block, n):
    rng = block_stream(seed, block)
    a1 = sample(s1, rng, n)
    a2 = sample(s2, rng, n)
    p1, p2 = payoffs(a1, a2, config, rng if config.tie_rule == "random-half" else None)
    d = p1 - p2
    return np.array([p1.sum(), p2.sum(), (p1 * p1).sum(), (p2 * p2).sum(), d.sum(), (d * d).sum()])


def simulate(strategy_1: Strategy, strategy_2: Strategy, config: GameConfig = DEFAULT_CONFIG,
             rounds: int = 100_000, seed: int = 0, threads: int = 1,
             block_size: int = SIM_BLOCK) -> SimulationResult:
    """Play ``rounds`` independent rounds; deterministic in ``seed`` whatever ``threads`` is."""
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    config.admit(strategy_1)
    config.admit(strategy_2)
    sizes = [block_size] * (rounds // block_size)
    if rounds % block_size:
        sizes.append(rounds % block_size)
    jobs = [(strategy_1, strategy_2, config, seed, b, n) for b, n in enumerate(sizes)]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: _simulate_block(*j), jobs))
    else:
        parts = [_simulate_block(*j) for j in jobs]
    tot = np.zeros(6)
    for part in parts:  # fixed reduction order
        tot += part
    n = float(rounds)
    means = tot[0] / n, tot[1] / n

    def se(total, total_sq):
        if rounds < 2:
            return 0.0
        var = max(total_sq - total * total / n, 0.0) / (n - 1.0)
        return math.sqrt(var / n)

    return SimulationResult(
        mean_payoffs=(float(means[0]), float(means[1])),
        std_errors=(se(tot[0], tot[2]), se(tot[1], tot[3])),
        rounds=rounds,
        seed=seed,
        diff_std_error=se(tot[4], tot[5]),
    )
