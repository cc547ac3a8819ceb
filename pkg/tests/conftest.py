"""Independent oracles: scipy's QUADPACK, never the package's own integrator."""

import warnings

import numpy as np
import pytest
from scipy import integrate

from bvgame.distributions import Strategy


def quad(f, lo, hi, points=None):
    pts = None if points is None else [p for p in points if lo < p < hi]
    with warnings.catch_warnings():
        # roundoff warnings only mean the 1e-14 target is out of reach
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, lo, hi, points=pts or None, epsabs=1e-14, epsrel=1e-13, limit=500)
    return val


def winning_integral_oracle(strategy: Strategy, a: float, reward: float = 1.0) -> float:
    """E[(R - X^2); |X| < |a|] by direct QUADPACK integration of the density."""
    c = abs(a)
    lo, hi = strategy.support
    lo, hi = max(lo, -c), min(hi, c)
    if hi <= lo:
        return 0.0
    return quad(lambda x: (reward - x * x) * float(strategy.pdf(x)), lo, hi, points=[0.0, strategy.mu])


def fubini_expected_oracle(si: Strategy, sj: Strategy, reward: float = 1.0) -> float:
    """Expected utility with the integration order swapped:
    E_i[(R - X^2) P(|A| > |X|)] -- one integral over player i's density."""
    def survival(t):
        t = abs(t)
        return 1.0 - (float(sj.cdf(t)) - float(sj.cdf(-t)))

    lo, hi = si.support
    lo = max(lo, si.mu - 40 * si.sigma)
    hi = min(hi, si.mu + 40 * si.sigma)
    pts = [0.0, si.mu, sj.mu, -sj.mu]
    slo, shi = sj.support
    pts += [v for e in (slo, shi) if np.isfinite(e) for v in (e, -e)]
    return quad(lambda x: (reward - x * x) * float(si.pdf(x)) * survival(x), lo, hi, points=pts)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
