"""Closed-form OU results against independent oracles and asymptotics.

Frozen expected values were computed with independent quadrature (Gaussian
moments of the integrated rate; scipy.integrate.dblquad of the rate
autocovariance) and 40-digit erfc evaluations, not with the formulas under
test.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from stochdisc import (
    DomainError,
    NondimParams,
    OuParams,
    Regime,
    classify_regime,
    dimensionalize,
    fluctuation_bracket,
    log_discount_exact,
    log_discount_slope,
    nondimensionalize,
    prob_below_r_infinity,
    prob_negative_stationary,
    r_infinity,
)

# k is either exactly 0 or large enough that k^2 terms stay above the
# underflow scale of the other parameters
ou_st = st.tuples(
    st.floats(-0.2, 0.2),
    st.floats(0.02, 5.0),
    st.one_of(st.just(0.0), st.floats(1e-6, 0.5)),
    st.floats(-0.3, 0.3),
).map(lambda t: OuParams(m=t[0], alpha=t[1], k=t[2], r0=t[3]))


class TestNondimensionalization:
    def test_table_usa_row(self):
        nd = nondimensionalize(OuParams(m=0.026, alpha=1 / 5.6, k=0.018))
        assert nd.mu == pytest.approx(0.146, abs=5e-4)
        assert nd.kappa == pytest.approx(0.239, abs=1e-3)

    def test_table_spain_row(self):
        nd = nondimensionalize(OuParams(m=0.057, alpha=1 / 17, k=0.0285))
        assert nd.kappa == pytest.approx(2.0, abs=3e-3)

    def test_zero_noise_zero_mean(self):
        nd = nondimensionalize(OuParams(m=0.0, alpha=0.37, k=0.0))
        assert (nd.mu, nd.kappa) == (0.0, 0.0)

    @given(ou_st)
    @settings(max_examples=200, deadline=None)
    def test_round_trip_is_exact(self, p):
        back = dimensionalize(nondimensionalize(p), r0=p.r0)
        assert back.m == pytest.approx(p.m, rel=1e-14, abs=1e-300)
        assert back.alpha == p.alpha
        assert back.k == pytest.approx(p.k, rel=1e-14, abs=1e-300)

    def test_invalid_nondim(self):
        with pytest.raises(DomainError):
            NondimParams(mu=0.1, kappa=0.2, alpha=0.0)
        with pytest.raises(DomainError):
            NondimParams(mu=0.1, kappa=-0.2, alpha=1.0)


def _log_discount_quadrature(p: OuParams, t: float) -> float:
    """Independent route: x(t) is Gaussian; get its moments by quadrature."""
    import warnings

    mean_rate = lambda s: p.m + (p.r0 - p.m) * np.exp(-p.alpha * s)
    cov = lambda u, s: (p.k**2 / (2 * p.alpha)) * (
        np.exp(-p.alpha * abs(s - u)) - np.exp(-p.alpha * (s + u))
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        ex, _ = integrate.quad(mean_rate, 0.0, t, limit=500)
        vx, _ = integrate.dblquad(cov, 0.0, t, 0.0, t, epsabs=1e-13, epsrel=1e-13)
    return -ex + 0.5 * vx


class TestLogDiscount:
    def test_at_zero(self):
        p = OuParams(m=0.03, alpha=0.5, k=0.02)
        assert log_discount_exact(p, 0.0) == 0.0

    def test_deterministic_rate_is_pure_exponential(self):
        p = OuParams(m=0.031, alpha=0.8, k=0.0, r0=0.031)
        for t in (0.5, 3.0, 40.0, 900.0):
            assert log_discount_exact(p, t) == pytest.approx(-p.m * t, rel=1e-13)

    # frozen quadrature-oracle values (value, abs tolerance from the quadrature error)
    @pytest.mark.parametrize("p,t,expected,tol", [
        (OuParams(m=0.03, alpha=0.5, k=0.02, r0=0.03), 10.0, -0.29437847416705265, 5e-9),
        (OuParams(m=0.026, alpha=1 / 5.6, k=0.018, r0=0.026), 30.0, -0.669997142011458, 1e-6),
        (OuParams(m=0.0, alpha=1.0, k=math.sqrt(2.0), r0=0.5), 3.0, 1.1232283936054324, 5e-7),
    ])
    def test_frozen_quadrature_values(self, p, t, expected, tol):
        assert log_discount_exact(p, t) == pytest.approx(expected, abs=tol)

    def test_fresh_quadrature_cross_check(self):
        p = OuParams(m=-0.02, alpha=0.3, k=0.05, r0=0.04)
        t = 12.0
        assert log_discount_exact(p, t) == pytest.approx(
            _log_discount_quadrature(p, t), abs=1e-7
        )

    def test_rejects_negative_time(self):
        with pytest.raises(DomainError):
            log_discount_exact(OuParams(m=0.0, alpha=1.0, k=0.1), -1.0)

    def test_array_input(self):
        p = OuParams(m=0.03, alpha=0.5, k=0.02)
        t = np.array([0.0, 1.0, 10.0])
        out = log_discount_exact(p, t)
        assert out.shape == (3,)
        assert out[0] == 0.0

    def test_huge_argument_saturates_not_raises(self):
        # growth regime pushed far beyond the double range must yield inf
        p = OuParams(m=0.0, alpha=1.0, k=40.0)
        val = log_discount_exact(p, 1e308)
        assert math.isinf(val) and val > 0

    @given(ou_st, st.floats(0.0, 200.0))
    @settings(max_examples=200, deadline=None)
    def test_noise_only_raises_log_discount(self, p, t):
        # average-of-exponentials dominates exponential-of-average
        quiet = OuParams(m=p.m, alpha=p.alpha, k=0.0, r0=p.r0)
        assert log_discount_exact(p, t) >= log_discount_exact(quiet, t) - 1e-12


class TestFluctuationBracket:
    @given(st.floats(0.0, 1e3))
    @settings(max_examples=300, deadline=None)
    def test_nonnegative(self, tau):
        assert fluctuation_bracket(tau) >= 0.0

    def test_small_tau_cubic(self):
        tau = 1e-4
        assert fluctuation_bracket(tau) == pytest.approx(tau**3 / 3.0, rel=1e-3)


class TestRInfinity:
    def test_usa_like(self):
        p = dimensionalize(NondimParams(mu=0.14, kappa=0.23, alpha=1 / 5.6))
        assert r_infinity(p) == pytest.approx(0.0203, abs=5e-5)

    def test_chile_like(self):
        p = dimensionalize(NondimParams(mu=-0.17, kappa=0.98, alpha=1 / 2.5))
        assert r_infinity(p) == pytest.approx(-0.260, abs=1e-4)

    def test_zero_noise(self):
        assert r_infinity(OuParams(m=0.04, alpha=0.3, k=0.0)) == 0.04

    @given(ou_st)
    @settings(max_examples=200, deadline=None)
    def test_strictly_below_mean_with_noise(self, p):
        if p.k > 0:
            assert r_infinity(p) < p.m

    @given(ou_st)
    @settings(max_examples=200, deadline=None)
    def test_matches_slope_limit(self, p):
        slope_limit = -log_discount_slope(p, 60.0 / p.alpha)
        assert slope_limit == pytest.approx(r_infinity(p), rel=1e-12, abs=1e-12)

    @given(ou_st, st.floats(30.0, 300.0))
    @settings(max_examples=200, deadline=None)
    def test_finite_difference_slope_converged(self, p, tau):
        # |d lnD/dt + r_inf| <= 0.01|r_inf| + 1e-9 for t >= 30/alpha
        t = tau / p.alpha
        h = min(0.01 / p.alpha, t * 1e-3)
        slope = (log_discount_exact(p, t + h) - log_discount_exact(p, t - h)) / (2 * h)
        r_inf = r_infinity(p)
        assert abs(slope + r_inf) <= 0.01 * abs(r_inf) + 1e-9


class TestClassifyRegime:
    def test_usa_decays(self):
        label = classify_regime(NondimParams(mu=0.14, kappa=0.23, alpha=1.0))
        assert label.regime is Regime.EXPONENTIAL_DECAY

    def test_exact_boundary_with_zero_tol(self):
        label = classify_regime(NondimParams(mu=0.5, kappa=1.0, alpha=1.0), tol=0.0)
        assert label.regime is Regime.ASYMPTOTICALLY_CONSTANT
        assert label.tol == 0.0

    def test_spain_grows(self):
        label = classify_regime(NondimParams(mu=0.96, kappa=2.0, alpha=1.0))
        assert label.regime is Regime.EXPONENTIAL_GROWTH

    @given(ou_st)
    @settings(max_examples=200, deadline=None)
    def test_agrees_with_r_infinity_sign(self, p):
        tol = 1e-9
        r_inf = r_infinity(p)
        if abs(r_inf) <= tol * p.alpha:
            return
        label = classify_regime(nondimensionalize(p), tol=tol)
        expected = Regime.EXPONENTIAL_DECAY if r_inf > 0 else Regime.EXPONENTIAL_GROWTH
        assert label.regime is expected


class TestProbNegative:
    def test_balanced_landmark(self):
        # mu = kappa: rates are negative 7.86% of the time
        p = prob_negative_stationary(NondimParams(mu=0.4, kappa=0.4, alpha=1.0))
        assert p == pytest.approx(0.078649603525142565, abs=1e-12)

    def test_usa_like(self):
        p = prob_negative_stationary(NondimParams(mu=0.14, kappa=0.23, alpha=1.0))
        assert p == pytest.approx(0.19466703876416689, abs=1e-12)

    def test_zero_noise_conventions(self):
        a = 1.0
        assert prob_negative_stationary(NondimParams(0.1, 0.0, a)) == 0.0
        assert prob_negative_stationary(NondimParams(-0.1, 0.0, a)) == 1.0
        assert prob_negative_stationary(NondimParams(0.0, 0.0, a)) == 0.5

    def test_small_ratio_series(self):
        # 1/2 - x/sqrt(pi) + O(x^2) for x <= 0.05
        for x in np.linspace(1e-4, 0.05, 9):
            p = prob_negative_stationary(NondimParams(mu=x, kappa=1.0, alpha=1.0))
            assert abs(p - (0.5 - x / math.sqrt(math.pi))) <= x * x

    def test_large_ratio_asymptote(self):
        # (1/(2 sqrt(pi))) (kappa/mu) e^(-mu^2/kappa^2) within 10% for mu/kappa >= 3
        for x in (3.0, 4.0, 5.0, 7.0, 10.0):
            p = prob_negative_stationary(NondimParams(mu=x, kappa=1.0, alpha=1.0))
            asym = (1.0 / (2.0 * math.sqrt(math.pi))) / x * math.exp(-x * x)
            assert p == pytest.approx(asym, rel=0.10)

    def test_monotone_decreasing_in_ratio(self):
        ratios = np.linspace(-2.0, 4.0, 61)
        vals = [prob_negative_stationary(NondimParams(x, 1.0, 1.0)) for x in ratios]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert prob_negative_stationary(NondimParams(0.0, 1.0, 1.0)) == 0.5


class TestProbBelowRInfinity:
    def test_usa_like_frozen(self):
        p = OuParams(m=0.026, alpha=1 / 5.6, k=0.018)
        # independent value: quadrature of the stationary normal below r_inf
        assert prob_below_r_infinity(p) == pytest.approx(0.43302784847403275, abs=1e-12)

    def test_kappa_form_quoted_in_table_units(self):
        p = dimensionalize(NondimParams(mu=0.14, kappa=0.23, alpha=1 / 5.6))
        assert prob_below_r_infinity(p) == pytest.approx(0.43540308728025204, abs=1e-12)

    @given(ou_st)
    @settings(max_examples=200, deadline=None)
    def test_both_algebraic_forms_agree(self, p):
        kappa = nondimensionalize(p).kappa
        assert prob_below_r_infinity(p) == pytest.approx(
            0.5 * math.erfc(kappa / 2.0), rel=1e-12, abs=1e-15
        )

    def test_zero_noise_boundary_convention(self):
        assert prob_below_r_infinity(OuParams(m=0.02, alpha=0.5, k=0.0)) == 0.5

    def test_quadrature_cross_check(self):
        p = OuParams(m=0.03, alpha=0.4, k=0.04)
        mean, var = p.m, p.k**2 / (2 * p.alpha)
        density = lambda r: np.exp(-((r - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)
        numeric, _ = integrate.quad(density, -np.inf, r_infinity(p))
        assert prob_below_r_infinity(p) == pytest.approx(numeric, abs=1e-10)

    def test_small_alpha_asymptote_ratios(self):
        # leading-order form sqrt(alpha/(2 pi (m - r_inf))) e^(-(m-r_inf)/(2 alpha)):
        # the exact/asymptote ratio is 0.9466 at y = (m-r_inf)/(2 alpha) = 8 and
        # enters the 5% band from y ~ 8.7 upward
        def ratio(y: float) -> float:
            alpha = 1.0
            gap = 2.0 * alpha * y  # m - r_inf
            k = math.sqrt(gap * 2.0 * alpha**2)
            p = OuParams(m=0.0, alpha=alpha, k=k)
            asym = math.sqrt(alpha / (2 * math.pi * gap)) * math.exp(-y)
            return prob_below_r_infinity(p) / asym

        assert ratio(8.0) == pytest.approx(0.946609531654, abs=1e-9)
        for y in (9.0, 10.0, 16.0, 32.0, 64.0):
            assert ratio(y) == pytest.approx(1.0, abs=0.05)
        assert abs(ratio(64.0) - 1.0) < abs(ratio(9.0) - 1.0)
