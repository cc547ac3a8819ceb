import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bvgame.analytic import (
    INEQUALITIES, dmu_expost_normal, expost_utility_normal, inequality_lhs,
    truncated_prob_normal, truncated_second_moment_normal, verify_inequalities,
)
from bvgame.distributions import Strategy
from conftest import quad, winning_integral_oracle

MUS = np.round(np.arange(1, 100) * 0.01, 2)
AS = np.round(np.arange(0, 51) * 0.1, 1)


def _npdf(mu, sigma):
    return lambda x: math.exp(-((x - mu) ** 2) / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi))


def test_truncated_prob_examples():
    assert truncated_prob_normal(0, 1, 0) == 0.0
    oracle = quad(_npdf(0, 1), -1.96, 1.96)
    assert truncated_prob_normal(0, 1, 1.96) == pytest.approx(oracle, abs=1e-13)
    assert truncated_prob_normal(0, 1, 1.96) == pytest.approx(0.95, abs=1e-4)
    s = math.sqrt(0.75)
    assert abs(truncated_prob_normal(0.5, s, 1.0) - quad(_npdf(0.5, s), -1, 1)) < 1e-10


def test_truncated_second_moment_examples():
    assert truncated_second_moment_normal(0, 1, 0) == 0.0
    assert abs(truncated_second_moment_normal(0, 1, 40) - 1.0) < 1e-12
    s = math.sqrt(0.91)
    f = _npdf(0.3, s)
    assert abs(truncated_second_moment_normal(0.3, s, 0.8) - quad(lambda x: x * x * f(x), -0.8, 0.8)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(0.05, 3), st.floats(0, 6))
def test_truncated_moments_vs_quadrature(mu, sigma, a):
    f = _npdf(mu, sigma)
    assert abs(truncated_prob_normal(mu, sigma, a) - quad(f, -a, a, [mu])) < 1e-10
    m2 = quad(lambda x: x * x * f(x), -a, a, [mu])
    assert abs(truncated_second_moment_normal(mu, sigma, a) - m2) < 1e-10 * max(1.0, mu * mu + sigma * sigma)


def test_expost_examples():
    assert expost_utility_normal(0.5, 0.0) == 0.0
    expected = 2 * math.exp(-0.5) / math.sqrt(2 * math.pi)
    assert expost_utility_normal(0.0, 1.0) == pytest.approx(expected, abs=1e-15)
    assert expost_utility_normal(0.0, 1.0) == pytest.approx(0.48394, abs=1e-5)
    oracle = winning_integral_oracle(Strategy.frontier("normal", 0.6), 1.2)
    assert abs(expost_utility_normal(0.6, 1.2) - oracle) < 1e-10


def test_expost_matches_general_decomposition():
    # P(|X|<a) - E[X^2; |X|<a] with the frontier substituted
    M, A = np.meshgrid(MUS, AS, indexing="ij")
    S = np.sqrt(1 - M * M)
    direct = truncated_prob_normal(M, S, A) - truncated_second_moment_normal(M, S, A)
    assert np.max(np.abs(direct - expost_utility_normal(M, A))) < 1e-14


def test_expost_domain():
    with pytest.raises(ValueError):
        expost_utility_normal(1.0, 0.5)


def test_expost_closed_form_vs_quadrature_grid():
    worst = 0.0
    for mu in MUS[::7]:
        s = Strategy.frontier("normal", mu)
        for a in AS[::5]:
            worst = max(worst, abs(expost_utility_normal(mu, a) - winning_integral_oracle(s, a)))
    assert worst < 1e-9


def test_derivative_examples():
    assert dmu_expost_normal(0.5, 0.0) == 0.0
    h = 1e-6
    fd = (expost_utility_normal(0.3 + h, 0.7) - expost_utility_normal(0.3 - h, 0.7)) / (2 * h)
    assert abs(dmu_expost_normal(0.3, 0.7) - fd) < 1e-5
    assert dmu_expost_normal(0.5, 2.0) <= 0.0


@pytest.mark.parametrize("mu", [0.0, 1.0, -0.2])
def test_derivative_domain(mu):
    with pytest.raises(ValueError):
        dmu_expost_normal(mu, 1.0)


def test_derivative_one_sided_limits():
    # approaches 0 at mu -> 0 (even function of mu)
    assert abs(dmu_expost_normal(1e-8, 1.3)) < 1e-7


def test_derivative_finite_difference_grid():
    M, A = np.meshgrid(MUS, AS, indexing="ij")
    h = 1e-6
    fd = (expost_utility_normal(M + h, A) - expost_utility_normal(M - h, A)) / (2 * h)
    assert np.max(np.abs(dmu_expost_normal(M, A) - fd)) < 1e-5


def test_sign_relation_critical_vs_derivative():
    M, A = np.meshgrid(MUS, AS, indexing="ij")
    crit = inequality_lhs("critical", M, A)
    d = dmu_expost_normal(M, A)
    assert np.all(crit * d <= 0.0)
    # the two expressions carry opposite signs: critical >= 0 <=> derivative <= 0
    assert np.all(crit >= -1e-12) and np.all(d <= 1e-12)


def test_inequality_examples():
    for a in (0.0, 0.7, 3.0):
        assert inequality_lhs("critical", 0.0, a) == 0.0
    assert inequality_lhs("critical", 0.5, 1.5) >= 0.0
    assert inequality_lhs("b2", 0.4) <= 0.0


def test_mu_only_ids_ignore_a():
    for ineq_id in ("b1", "b2", "b4"):
        assert inequality_lhs(ineq_id, 0.3, 1.0) == inequality_lhs(ineq_id, 0.3, 7.0)


def test_inequality_ids_have_one_sign():
    assert {k: v.sign for k, v in INEQUALITIES.items()} == {
        "critical": 1, "d1": 1, "d2": 1, "b3": 1, "b1": -1, "b2": -1, "b4": -1,
    }


def test_critical_matches_literal_transcription():
    mu, a = 0.37, 2.2
    q = 1 - mu**2
    base = 2 * mu**2 - a**2 - 1
    lit = (base * (1 - a * mu) + 2 * mu**2 * q) * math.exp(a * mu / q) - (
        base * (1 + a * mu) + 2 * mu**2 * q) * math.exp(-a * mu / q)
    assert inequality_lhs("critical", mu, a) == pytest.approx(lit, rel=1e-13)


def test_b3_literal_transcription():
    mu, a = 0.61, 1.45
    q = 1 - mu**2
    left = a**3 * mu**2 + a**2 * mu * (8 - 9 * mu**2) - mu * (4 - 7 * mu**2 + 2 * mu**4) + a * (12 - 29 * mu**2 + 16 * mu**4)
    right = a**3 * mu**2 - a**2 * mu * (8 - 9 * mu**2) + mu * (4 - 7 * mu**2 + 2 * mu**4) + a * (12 - 29 * mu**2 + 16 * mu**4)
    lit = left * math.exp((1 + a * mu) / q) - right * math.exp((1 - a * mu) / q)
    assert inequality_lhs("b3", mu, a) == pytest.approx(lit, rel=1e-12)


def test_d1_is_derivative_of_critical_up_to_positive_factor():
    # d/da critical = d1 / (1 - mu^2) ; checked by central differences
    mu = np.array([0.2, 0.5, 0.8])
    a, h = 2.0, 1e-6
    fd = (inequality_lhs("critical", mu, a + h) - inequality_lhs("critical", mu, a - h)) / (2 * h)
    assert np.allclose(fd * (1 - mu**2), inequality_lhs("d1", mu, a), rtol=1e-6)


@pytest.mark.parametrize("full,boundary", [("d1", "b1"), ("d2", "b2")])
def test_boundary_forms_at_a_equal_one(full, boundary):
    mu = np.linspace(0.05, 0.95, 19)
    # the rearranged a = 1 form divides the brackets by -2
    assert np.allclose(inequality_lhs(full, mu, 1.0), -2.0 * inequality_lhs(boundary, mu), rtol=1e-10)


MU_CHAIN = np.linspace(0.05, 0.95, 7)


def _d_da(ineq_id, mu, a, h=1e-6):
    return (inequality_lhs(ineq_id, mu, a + h) - inequality_lhs(ineq_id, mu, a - h)) / (2 * h)


@pytest.mark.parametrize("a", [1.0, 2.5])
def test_d2_is_scaled_derivative_of_d1(a):
    q = 1 - MU_CHAIN**2
    assert np.allclose(_d_da("d1", MU_CHAIN, a) * q, inequality_lhs("d2", MU_CHAIN, a), rtol=1e-6)


@pytest.mark.parametrize("a", [1.0, 2.5])
def test_b3_is_scaled_derivative_of_d2(a):
    q = 1 - MU_CHAIN**2
    scaled = _d_da("d2", MU_CHAIN, a) * q / MU_CHAIN**2 * np.exp(1 / q)
    assert np.allclose(scaled, inequality_lhs("b3", MU_CHAIN, a), rtol=1e-6)


def test_b4_is_scaled_mu_derivative_of_b2():
    # only holds with the quartic coefficient read as 24 mu^4
    mu, h = MU_CHAIN, 1e-6
    q = 1 - mu**2
    d = (inequality_lhs("b2", mu + h) - inequality_lhs("b2", mu - h)) / (2 * h)
    assert np.allclose(d * q / mu * np.exp(0.5 / q), inequality_lhs("b4", mu), rtol=1e-6)


def test_no_overflow_near_one():
    vals = inequality_lhs("b3", 0.99, np.array([1.0, 10.0]))
    assert np.all(np.isfinite(vals))


def test_verify_report_flags_flipped_id():
    rows = verify_inequalities(np.arange(0, 1, 0.1), np.arange(1, 3, 0.5), ["critical", "critical_flipped"])
    assert rows[0]["passed"] and not rows[1]["passed"]
