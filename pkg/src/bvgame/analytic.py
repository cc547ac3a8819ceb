"""Closed forms for normal strategies on the unit error frontier.

All functions broadcast over numpy arrays. The dominance-ladder inequality
expressions are exposed through :func:`inequality_lhs` and :data:`INEQUALITIES`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _scalar(out):
    out = np.asarray(out, dtype=float)
    return out[()] if out.ndim == 0 else out


def truncated_prob_normal(mu, sigma, a):
    """P(|X| < a) for X ~ N(mu, sigma**2)."""
    mu, sigma, a = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (mu, sigma, a)))
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    out = special.ndtr((a - mu) / sigma) - special.ndtr((-a - mu) / sigma)
    return _scalar(np.where(a > 0, out, 0.0))


def truncated_second_moment_normal(mu, sigma, a):
    """E[X**2 ; |X| < a] for X ~ N(mu, sigma**2)."""
    mu, sigma, a = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (mu, sigma, a)))
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    e_lo = np.exp(-((a - mu) ** 2) / (2.0 * sigma**2))
    e_hi = np.exp(-((a + mu) ** 2) / (2.0 * sigma**2))
    prob = special.ndtr((a - mu) / sigma) - special.ndtr((-a - mu) / sigma)
    out = (
        -mu * sigma * INV_SQRT_2PI * (e_lo - e_hi)
        - a * sigma * INV_SQRT_2PI * (e_lo + e_hi)
        + (sigma**2 + mu**2) * prob
    )
    return _scalar(np.where(a > 0, out, 0.0))


def _check_frontier_mu(mu, open_at_zero=False):
    if np.any(np.abs(mu) >= 1.0):
        raise ValueError("frontier mu must satisfy |mu| < 1 (sigma = 0 is degenerate)")
    if open_at_zero and np.any(mu <= 0.0):
        raise ValueError("mu must lie in the open interval (0, 1)")


def expost_utility_normal(mu, a):
    """Expected payoff (reward 1) of ``sqrt(1-mu^2) Z + mu`` against a realization ``a``.

    The cdf terms cancel on the frontier, leaving two Gaussian bumps.
    """
    mu, a = np.broadcast_arrays(np.asarray(mu, dtype=float), np.abs(np.asarray(a, dtype=float)))
    _check_frontier_mu(mu)
    q = 1.0 - mu * mu
    s = np.sqrt(q)
    e_lo = np.exp(-((a - mu) ** 2) / (2.0 * q))
    e_hi = np.exp(-((a + mu) ** 2) / (2.0 * q))
    out = INV_SQRT_2PI * s * (mu * (e_lo - e_hi) + a * (e_lo + e_hi))
    return _scalar(np.where(a > 0, out, 0.0))


def dmu_expost_normal(mu, a):
    """Partial derivative of :func:`expost_utility_normal` in ``mu`` for 0 < mu < 1."""
    mu, a = np.broadcast_arrays(np.asarray(mu, dtype=float), np.abs(np.asarray(a, dtype=float)))
    _check_frontier_mu(mu, open_at_zero=True)
    q = 1.0 - mu * mu
    s = np.sqrt(q)
    e_lo = np.exp(-0.5 * (a - mu) ** 2 / q)
    e_hi = np.exp(-0.5 * (a + mu) ** 2 / q)
    lo = s - (a + mu) * mu / s + (a * a - mu * mu) * (1.0 - a * mu) * s / q**2
    hi = s + (a - mu) * mu / s + (a * a - mu * mu) * (1.0 + a * mu) * s / q**2
    out = INV_SQRT_2PI * (lo * e_lo - hi * e_hi)
    return _scalar(np.where(a > 0, out, 0.0))


def _two_exp(plus, minus, shift, t):
    """``plus*exp(shift+t) - minus*exp(shift-t)`` factored so it overflows to a signed inf, never nan."""
    with np.errstate(over="ignore", invalid="ignore"):
        scale = np.exp(shift + np.abs(t))
        inner = np.where(t >= 0, plus - minus * np.exp(-2.0 * t), plus * np.exp(2.0 * t) - minus)
        out = np.where(inner == 0.0, 0.0, scale * inner)
    return out


def _critical(mu, a):
    q = 1.0 - mu * mu
    base = 2 * mu**2 - a**2 - 1
    plus = base * (1 - a * mu) + 2 * mu**2 * q
    minus = base * (1 + a * mu) + 2 * mu**2 * q
    return _two_exp(plus, minus, 0.0, a * mu / q)


def _d1(mu, a):
    q = 1.0 - mu * mu
    lin = a * (2 - 3 * mu**2 + 2 * mu**4)
    plus = a**3 * mu**2 + mu**3 + a**2 * mu * (2 - 3 * mu**2) - lin
    minus = a**3 * mu**2 - mu**3 - a**2 * mu * (2 - 3 * mu**2) - lin
    return _two_exp(plus, minus, 0.0, a * mu / q)


def _d2(mu, a):
    q = 1.0 - mu * mu
    even = -2 + 5 * mu**2 - 4 * mu**4 + 2 * mu**6 + a**2 * mu**2 * (5 - 6 * mu**2)
    odd = a**3 * mu**3 + a * mu * (2 - 7 * mu**2 + 4 * mu**4)
    return _two_exp(even + odd, even - odd, 0.0, a * mu / q)


def _b1(mu, a=None):
    q = 1.0 - mu * mu
    plus = 1 - mu - 2 * mu**2 + mu**3 + mu**4
    minus = 1 + mu - 2 * mu**2 - mu**3 + mu**4
    return _two_exp(plus, minus, 0.0, mu / q)


def _b2(mu, a=None):
    q = 1.0 - mu * mu
    plus = 1 - mu - 5 * mu**2 + 3 * mu**3 + 5 * mu**4 - 2 * mu**5 - mu**6
    minus = 1 + mu - 5 * mu**2 - 3 * mu**3 + 5 * mu**4 + 2 * mu**5 - mu**6
    return _two_exp(plus, minus, 0.0, mu / q)


def _b3(mu, a):
    q = 1.0 - mu * mu
    even = a**3 * mu**2 + a * (12 - 29 * mu**2 + 16 * mu**4)
    odd = a**2 * mu * (8 - 9 * mu**2) - mu * (4 - 7 * mu**2 + 2 * mu**4)
    return _two_exp(even + odd, even - odd, 1.0 / q, a * mu / q)


def _b4(mu, a=None):
    # the quartic coefficient is 24*mu**4 in both brackets (printed once as 24*a**4)
    q = 1.0 - mu * mu
    plus = -11 + 7 * mu + 31 * mu**2 - 22 * mu**3 - 24 * mu**4 + 11 * mu**5 + 6 * mu**6
    minus = -11 - 7 * mu + 31 * mu**2 + 22 * mu**3 - 24 * mu**4 - 11 * mu**5 + 6 * mu**6
    return _two_exp(plus, minus, 0.5 / q, mu / q)


@dataclass(frozen=True)
class Inequality:
    id: str
    label: str
    sign: int  # +1: lhs >= 0 asserted, -1: lhs <= 0 asserted
    uses_a: bool
    lhs: Callable


INEQUALITIES: dict[str, Inequality] = {
    ineq.id: ineq
    for ineq in (
        Inequality("critical", "critical inequality", +1, True, _critical),
        Inequality("d1", "eq:cas2b2 1", +1, True, _d1),
        Inequality("d2", "eq:cas2b2 2", +1, True, _d2),
        Inequality("b1", "cas:2b2 1b", -1, False, _b1),
        Inequality("b2", "cas:2b2 2b", -1, False, _b2),
        Inequality("b3", "cas:2b2 3b", +1, True, _b3),
        Inequality("b4", "cas:2b2 4b", -1, False, _b4),
    )
}

# harness self-test: the critical expression with its asserted sign reversed
DEBUG_INEQUALITIES: dict[str, Inequality] = {
    "critical_flipped": Inequality("critical_flipped", "critical inequality, sign reversed", -1, True, _critical),
}


def get_inequality(ineq_id: str) -> Inequality:
    try:
        return INEQUALITIES[ineq_id]
    except KeyError:
        pass
    try:
        return DEBUG_INEQUALITIES[ineq_id]
    except KeyError:
        valid = ", ".join([*INEQUALITIES, *DEBUG_INEQUALITIES])
        raise ValueError(f"unknown inequality id {ineq_id!r}; valid ids: {valid}") from None


def inequality_lhs(ineq_id: str, mu, a=0.0):
    """Left-hand side of a named inequality; ``a`` is ignored by the mu-only ones."""
    ineq = get_inequality(ineq_id)
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0) or np.any(mu >= 1):
        raise ValueError("mu must lie in [0, 1)")
    if ineq.uses_a:
        mu, a = np.broadcast_arrays(mu, np.asarray(a, dtype=float))
        out = ineq.lhs(mu, a)
    else:
        out = ineq.lhs(mu)
    out = np.where(mu == 0.0, 0.0, out)
    return _scalar(out)


def verify_inequalities(mu_grid, a_grid, ids=None, slack: float = 1e-12) -> list[dict]:
    """Evaluate each inequality on the grid and report its worst value."""
    mu_grid = np.asarray(mu_grid, dtype=float)
    a_grid = np.asarray(a_grid, dtype=float)
    ids = list(INEQUALITIES) if ids is None else list(ids)
    rows = []
    for ineq_id in ids:
        ineq = get_inequality(ineq_id)
        if ineq.uses_a:
            M, A = np.meshgrid(mu_grid, a_grid, indexing="ij")
        else:
            M, A = mu_grid, np.full_like(mu_grid, np.nan)
        vals = np.asarray(inequality_lhs(ineq_id, M, A if ineq.uses_a else 0.0), dtype=float)
        signed = ineq.sign * vals
        k = int(np.argmin(signed))
        worst = float(vals.flat[k])
        rows.append({
            "id": ineq.id,
            "label": ineq.label,
            "asserted": ">= 0" if ineq.sign > 0 else "<= 0",
            "grid_size": int(vals.size),
            "extreme_kind": "min" if ineq.sign > 0 else "max",
            "extreme_value": worst,
            "extreme_mu": float(M.flat[k]),
            "extreme_a": float(A.flat[k]) if ineq.uses_a else None,
            "passed": bool(signed.flat[k] >= -slack),
        })
    return rows
