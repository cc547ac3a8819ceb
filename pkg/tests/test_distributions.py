import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from bvgame.distributions import (
    FAMILIES, DegenerateStrategyError, Family, Strategy, cdf, pdf, sample, strategy_pdf,
)
from conftest import quad


def _span(fam):
    lo, hi = fam.support
    return max(lo, -60.0), min(hi, 60.0)


@pytest.mark.parametrize("fam", FAMILIES)
def test_standardized_moments(fam):
    lo, hi = _span(fam)
    pts = [0.0]
    assert abs(quad(lambda x: float(fam.pdf(x)), lo, hi, pts) - 1.0) < 1e-10
    assert abs(quad(lambda x: x * float(fam.pdf(x)), lo, hi, pts)) < 1e-10
    assert abs(quad(lambda x: x * x * float(fam.pdf(x)), lo, hi, pts) - 1.0) < 1e-8


@pytest.mark.parametrize("fam", FAMILIES)
def test_pdf_symmetric(fam):
    x = np.linspace(-4, 4, 161)
    assert np.array_equal(fam.pdf(x), fam.pdf(-x))


def test_pdf_examples():
    assert pdf("normal", 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-15)
    assert pdf("laplace", 0.0) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert pdf("uniform", 2.0) == 0.0


def test_cdf_examples():
    assert cdf("normal", 0.0) == 0.5
    oracle = 0.5 + quad(lambda x: float(pdf("normal", x)), 0.0, 1.0)
    assert cdf("normal", 1.0) == pytest.approx(oracle, abs=1e-12)
    assert cdf("normal", 1.0) == pytest.approx(0.841345, abs=5e-7)
    assert cdf("uniform", math.sqrt(3)) == 1.0


@pytest.mark.parametrize("fam", FAMILIES)
def test_cdf_half_at_zero_and_monotone(fam):
    assert fam.cdf(0.0) == pytest.approx(0.5, abs=1e-15)
    x = np.linspace(-6, 6, 2001)
    assert np.all(np.diff(fam.cdf(x)) >= 0)


@pytest.mark.parametrize("fam", FAMILIES)
def test_cdf_derivative_matches_pdf(fam):
    h = 1e-5
    x = np.linspace(-5, 5, 1001)
    # stay off the non-differentiable points
    lo, hi = fam.support
    x = x[(np.abs(x) > 2 * h) & (np.abs(x - lo) > 2 * h) & (np.abs(x - hi) > 2 * h)]
    fd = (fam.cdf(x + h) - fam.cdf(x - h)) / (2 * h)
    assert np.max(np.abs(fd - fam.pdf(x))) < 1e-6


@pytest.mark.parametrize("fam", FAMILIES)
def test_ppf_inverts_cdf(fam):
    p = np.linspace(1e-6, 1 - 1e-6, 999)
    assert np.allclose(fam.cdf(fam.ppf(p)), p, atol=1e-12)


@pytest.mark.parametrize("fam", FAMILIES)
def test_samples_match_cdf_ks(fam):
    rng = np.random.default_rng(7)
    draws = sample(Strategy(fam, 0.0, 1.0), rng, 100_000)
    res = stats.kstest(draws, lambda x: fam.cdf(x))
    assert res.statistic < 0.01


def test_point_mass_sampling():
    out = sample(Strategy("normal", 0.0, 0.0), np.random.default_rng(1), 3)
    assert out.tolist() == [0.0, 0.0, 0.0]


def test_sample_mean_clt():
    draws = sample(Strategy("normal", 1.0, 2.0), np.random.default_rng(11), 100_000)
    assert abs(draws.mean() - 1.0) < 4 * 2 / math.sqrt(1e5)


def test_sampling_deterministic():
    s = Strategy("logistic", 0.2, 0.7)
    a = sample(s, np.random.default_rng(5), 1000)
    b = sample(s, np.random.default_rng(5), 1000)
    assert np.array_equal(a, b)


def test_sample_rejects_empty():
    with pytest.raises(ValueError):
        sample(Strategy("normal", 0, 1), np.random.default_rng(0), 0)


def test_strategy_pdf_examples():
    phi0 = 1 / math.sqrt(2 * math.pi)
    assert strategy_pdf(Strategy("normal", 0, 1), 0) == pytest.approx(phi0)
    assert strategy_pdf(Strategy("normal", 2, 1), 2) == pytest.approx(phi0)
    eps = 0.1
    s = Strategy("uniform", eps, (1 + eps) / math.sqrt(3))
    assert strategy_pdf(s, 0.0) == pytest.approx(1 / (2 * (1 + eps)), rel=1e-12)


def test_strategy_pdf_rejects_point_mass():
    with pytest.raises(DegenerateStrategyError):
        strategy_pdf(Strategy("normal", 0.5, 0.0), 0.5)


@pytest.mark.parametrize("fam", FAMILIES)
@pytest.mark.parametrize("mu,sigma", [(0.3, 0.5), (-1.2, 2.0)])
def test_strategy_moments(fam, mu, sigma):
    s = Strategy(fam, mu, sigma)
    lo, hi = s.support
    lo, hi = max(lo, mu - 60 * sigma), min(hi, mu + 60 * sigma)
    mean = quad(lambda x: x * float(s.pdf(x)), lo, hi, [mu])
    var = quad(lambda x: (x - mu) ** 2 * float(s.pdf(x)), lo, hi, [mu])
    assert abs(mean - mu) < 1e-8
    assert abs(var - sigma**2) < 1e-6


@settings(max_examples=50, deadline=None)
@given(
    fam=st.sampled_from(FAMILIES),
    mu=st.floats(-3, 3),
    sigma=st.floats(0.05, 3),
    x=st.floats(-10, 10),
)
def test_location_scale_change_of_variables(fam, mu, sigma, x):
    s = Strategy(fam, mu, sigma)
    assert s.pdf(x) == pytest.approx(fam.pdf((x - mu) / sigma) / sigma, rel=1e-12, abs=1e-300)


def test_frontier_strategy():
    for mu in np.linspace(0, 1, 101):
        s = Strategy.frontier("normal", mu)
        assert abs(s.mu**2 + s.sigma**2 - 1.0) < 1e-15
    with pytest.raises(ValueError):
        Strategy.frontier("normal", 1.2)


def test_family_names_roundtrip():
    assert [f.value for f in FAMILIES] == ["normal", "laplace", "logistic", "uniform", "triangle"]
    assert Family.parse("Laplace") is Family.LAPLACE
    with pytest.raises(ValueError, match="valid families"):
        Family.parse("cauchy")


def test_negative_sigma_rejected():
    with pytest.raises(ValueError):
        Strategy("normal", 0.0, -0.1)
