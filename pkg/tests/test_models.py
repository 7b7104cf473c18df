"""Rate-model records, validation and single-step transitions."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochdisc import (
    DomainError,
    FellerParams,
    LognormalParams,
    OuParams,
    stationary_stats,
    transition_sample,
    transition_step_feller,
    transition_step_lognormal,
    validate,
)
from stochdisc._kernels.philox import normal_matrix

params_st = st.tuples(
    st.floats(-0.2, 0.2),        # m
    st.floats(0.02, 5.0),        # alpha
    st.floats(0.0, 0.5),         # k
    st.floats(-0.3, 0.3),        # r0
).map(lambda t: OuParams(m=t[0], alpha=t[1], k=t[2], r0=t[3]))


class TestValidation:
    def test_table_style_params_are_valid(self):
        p = validate(OuParams(m=0.026, alpha=0.1786, k=0.018, r0=0.026))
        assert p.alpha == 0.1786

    def test_negative_mean_is_legal_for_ou(self):
        OuParams(m=-0.107, alpha=0.2, k=0.34)

    def test_zero_alpha_rejected(self):
        with pytest.raises(DomainError, match="alpha"):
            OuParams(m=0.02, alpha=0.0, k=0.01)

    def test_negative_feller_start_rejected(self):
        with pytest.raises(DomainError, match="r0"):
            FellerParams(m=0.02, alpha=0.5, k=0.1, r0=-0.01)

    def test_feller_negative_mean_rejected(self):
        with pytest.raises(DomainError, match="m"):
            FellerParams(m=-0.01, alpha=0.5, k=0.1)

    def test_lognormal_needs_positive_start(self):
        with pytest.raises(DomainError, match="r0"):
            LognormalParams(a=0.0, b=0.2, r0=0.0)

    def test_negative_noise_rejected(self):
        with pytest.raises(DomainError, match="k"):
            OuParams(m=0.0, alpha=1.0, k=-0.1)
        with pytest.raises(DomainError, match="b"):
            LognormalParams(a=0.0, b=-0.2, r0=0.05)

    def test_non_finite_rejected(self):
        with pytest.raises(DomainError):
            OuParams(m=math.nan, alpha=1.0, k=0.1)
        with pytest.raises(DomainError):
            OuParams(m=0.0, alpha=math.inf, k=0.1)

    def test_validate_rejects_non_models(self):
        with pytest.raises(DomainError, match="not a rate model"):
            validate("ou")  # type: ignore[arg-type]

    def test_r0_defaults_to_mean(self):
        assert OuParams(m=0.04, alpha=0.5, k=0.01).r0 == 0.04
        assert FellerParams(m=0.04, alpha=0.5, k=0.01).r0 == 0.04


class TestStationaryStats:
    def test_table_style_value(self):
        mean, var = stationary_stats(OuParams(m=0.026, alpha=0.1786, k=0.018))
        assert mean == 0.026
        assert var == pytest.approx(9.07e-4, rel=3e-3)
        assert var == pytest.approx(0.018**2 / (2 * 0.1786), rel=1e-14)

    def test_zero_noise_zero_variance(self):
        assert stationary_stats(OuParams(m=0.02, alpha=1.0, k=0.0))[1] == 0.0

    def test_unit_normalization(self):
        _, var = stationary_stats(OuParams(m=0.0, alpha=1.0, k=math.sqrt(2.0)))
        assert var == pytest.approx(1.0, rel=1e-15)


class TestOuTransition:
    def test_mean_level_is_fixed_point(self):
        p = OuParams(m=0.03, alpha=0.7, k=0.05)
        assert transition_sample(p, 0.03, 1.3, 0.0) == pytest.approx(0.03, abs=1e-18)

    def test_long_step_reverts_to_mean(self):
        p = OuParams(m=0.03, alpha=0.7, k=0.05)
        assert transition_sample(p, 0.5, 1e6, 0.0) == pytest.approx(0.03, abs=1e-15)

    def test_hand_evaluable_half_decay(self):
        p = OuParams(m=0.0, alpha=1.0, k=math.sqrt(2.0), r0=1.0)
        assert transition_sample(p, 1.0, math.log(2.0), 0.0) == pytest.approx(0.5, rel=1e-14)

    def test_requires_positive_dt(self):
        p = OuParams(m=0.0, alpha=1.0, k=0.1)
        with pytest.raises(DomainError, match="dt"):
            transition_sample(p, 0.0, 0.0, 0.0)

    @pytest.mark.parametrize("case,p,t", [
        (0, OuParams(m=0.02, alpha=0.4, k=0.03, r0=0.08), 1.7),
        (1, OuParams(m=-0.107, alpha=0.2, k=0.34, r0=0.0), 0.25),
        (2, OuParams(m=0.026, alpha=1 / 5.6, k=0.018, r0=0.026), 11.0),
        (3, OuParams(m=0.0, alpha=3.0, k=0.5, r0=-0.2), 0.04),
        (4, OuParams(m=0.3, alpha=0.05, k=0.01, r0=0.3), 60.0),
    ])
    def test_one_shot_moments_match_theory(self, case, p, t):
        # empirical mean/variance over 2e5 one-shot draws within 4 standard errors
        n = 200_000
        z = normal_matrix(314 + case, 0, 1, n)[0]
        samples = transition_sample(p, p.r0, t, z)
        mean_th = p.m + (p.r0 - p.m) * math.exp(-p.alpha * t)
        var_th = p.k**2 / (2 * p.alpha) * (1 - math.exp(-2 * p.alpha * t))
        se_mean = samples.std(ddof=1) / math.sqrt(n)
        assert abs(samples.mean() - mean_th) < 4 * se_mean
        var_emp = samples.var(ddof=1)
        se_var = var_emp * math.sqrt(2.0 / (n - 1))
        assert abs(var_emp - var_th) < 4 * se_var

    @given(params_st, st.floats(0.01, 20.0), st.floats(-0.3, 0.3))
    @settings(max_examples=150, deadline=None)
    def test_half_step_composition_matches_one_step(self, p, dt, r):
        # exactness: composing the transition moments over dt/2 twice equals dt
        decay_h = math.exp(-p.alpha * dt / 2)
        var_h = p.k**2 * (-math.expm1(-p.alpha * dt)) / (2 * p.alpha)
        mean_two = p.m + ((p.m + (r - p.m) * decay_h) - p.m) * decay_h
        var_two = var_h * decay_h**2 + var_h
        mean_one = p.m + (r - p.m) * math.exp(-p.alpha * dt)
        var_one = p.k**2 * (-math.expm1(-2 * p.alpha * dt)) / (2 * p.alpha)
        assert mean_two == pytest.approx(mean_one, rel=1e-12, abs=1e-15)
        assert var_two == pytest.approx(var_one, rel=1e-12, abs=1e-18)

    @given(params_st)
    @settings(max_examples=100, deadline=None)
    def test_transition_variance_limits_to_stationary(self, p):
        var_limit = p.k**2 * (-math.expm1(-2 * p.alpha * 1e9)) / (2 * p.alpha)
        assert var_limit == pytest.approx(stationary_stats(p)[1], rel=1e-12, abs=1e-300)


class TestFellerStep:
    def test_absorbing_at_zero_when_level_is_zero(self):
        p = FellerParams(m=0.0, alpha=0.8, k=0.2, r0=0.0)
        for noise in (-3.0, 0.0, 2.5):
            assert transition_step_feller(p, 0.0, 0.1, noise) == 0.0

    def test_drift_fixed_point(self):
        p = FellerParams(m=0.05, alpha=0.8, k=0.2)
        assert transition_step_feller(p, 0.05, 0.1, 0.0) == pytest.approx(0.05, abs=1e-18)

    def test_never_negative(self):
        p = FellerParams(m=0.03, alpha=0.5, k=0.4, r0=0.01)
        z = normal_matrix(99, 0, 1, 100_000)[0]
        r = np.full_like(z, 0.005)
        stepped = transition_step_feller(p, r, 0.25, z)
        assert stepped.min() >= 0.0


class TestLognormalStep:
    def test_ito_correction_lowers_the_mean_path(self):
        p = LognormalParams(a=0.0, b=0.3, r0=0.05)
        out = transition_step_lognormal(p, 0.05, 2.0, 0.0)
        assert out == pytest.approx(0.05 * math.exp(-0.5 * 0.09 * 2.0), rel=1e-14)
        assert out < 0.05

    def test_always_positive(self):
        p = LognormalParams(a=0.01, b=0.6, r0=0.04)
        z = normal_matrix(17, 0, 1, 100_000)[0]
        stepped = transition_step_lognormal(p, np.full_like(z, 1e-8), 0.5, z)
        assert stepped.min() > 0.0
