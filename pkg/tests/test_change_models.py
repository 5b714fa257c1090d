import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tcdkit.change_models import (GaussianSpec, GeneralChange, Hypothesis, MeanChange,
                                  VarianceChange, llr, llr_coeffs, tuned_from_error)
from tcdkit.errors import ConfigError, DomainError


def density_ratio(model, x):
    return model.tuned.logpdf(x) - model.pre.logpdf(x)


class TestCoefficients:
    def test_mean_change(self):
        k = llr_coeffs(MeanChange(0.0, 1.0, 1.0))
        assert (k.a, k.b, k.c) == (0.0, 1.0, -0.5)

    def test_variance_change_case2(self):
        k = llr_coeffs(VarianceChange(1.11e-5, 2.78e-4))
        assert k.b == 0.0
        assert k.a == pytest.approx(4.325e4, rel=1e-3)
        assert k.c == pytest.approx(-1.611, abs=1e-3)

    def test_general_equal_variance_is_mean_change(self):
        g = GeneralChange(GaussianSpec(2.0, 3.0), GaussianSpec(5.0, 3.0))
        kg = llr_coeffs(g)
        km = llr_coeffs(MeanChange(2.0, 3.0, 5.0))
        assert kg.a == 0.0
        assert kg.b == pytest.approx(km.b, rel=1e-14)
        assert kg.c == pytest.approx(km.c, rel=1e-14)

    def test_tuned_not_actual(self):
        k1 = llr_coeffs(MeanChange(0.0, 1.0, 1.0, 4.0))
        k2 = llr_coeffs(MeanChange(0.0, 1.0, 1.0))
        assert k1 == k2


class TestLlr:
    def test_midpoint(self):
        assert llr(MeanChange(0.0, 1.0, 1.0), 0.5) == 0.0

    def test_variance_at_zero(self):
        assert llr(VarianceChange(1.0, 2.0), 0.0) == pytest.approx(math.log(1 / math.sqrt(2)), abs=1e-12)

    @pytest.mark.parametrize("model", [
        MeanChange(25118.86, 6.944e7, 5011.87),
        VarianceChange(1.11e-5, 2.78e-4),
        GeneralChange(GaussianSpec(0.1, 1.14e-3), GaussianSpec(0.2, 2.03e-3)),
        GeneralChange(GaussianSpec(-1.0, 0.5), GaussianSpec(3.0, 0.1)),
    ])
    def test_density_ratio(self, model):
        rng = np.random.default_rng(11)
        pre, post = model.pre, model.tuned
        lo = min(pre.mu - 4 * pre.sigma, post.mu - 4 * post.sigma)
        hi = max(pre.mu + 4 * pre.sigma, post.mu + 4 * post.sigma)
        x = rng.uniform(lo, hi, 100)
        got = llr(model, x)
        ref = density_ratio(model, x)
        assert np.allclose(got, ref, rtol=1e-10, atol=1e-10)

    @given(st.floats(-5, 5))
    def test_general_equal_means_reduces_to_variance(self, x):
        g = GeneralChange(GaussianSpec(0.0, 1.3), GaussianSpec(0.0, 2.9))
        v = VarianceChange(1.3, 2.9)
        assert abs(llr(g, x) - llr(v, x)) <= 1e-12

    @given(st.floats(-100, 100), st.floats(-100, 100))
    def test_mean_change_monotone(self, x1, x2):
        model = MeanChange(0.0, 2.0, 1.5)
        if x2 - x1 > 1e-9:
            assert llr(model, x1) < llr(model, x2)
        elif x1 <= x2:
            assert llr(model, x1) <= llr(model, x2)

    @pytest.mark.parametrize("model", [
        MeanChange(25118.86, 6.944e7, 5011.87),
        VarianceChange(1.11e-5, 2.78e-4),
        GeneralChange(GaussianSpec(0.1, 1.14e-3), GaussianSpec(0.2, 2.03e-3)),
    ])
    def test_sign_of_expected_llr(self, model):
        rng = np.random.default_rng(3)
        x0 = rng.normal(model.pre.mu, model.pre.sigma, 100_000)
        x1 = rng.normal(model.tuned.mu, model.tuned.sigma, 100_000)
        assert llr(model, x0).mean() < 0 < llr(model, x1).mean()


class TestValidation:
    def test_variance_positive(self):
        with pytest.raises(DomainError):
            GaussianSpec(0.0, 0.0)
        with pytest.raises(DomainError):
            MeanChange(0.0, -1.0, 1.0)

    def test_tuned_differs_from_pre(self):
        with pytest.raises(DomainError):
            MeanChange(1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            VarianceChange(2.0, 2.0)
        with pytest.raises(DomainError):
            GeneralChange(GaussianSpec(0, 1), GaussianSpec(0, 1))

    def test_actual_defaults_to_tuned(self):
        m = VarianceChange(1.0, 2.0)
        assert m.metric(Hypothesis.H1) == GaussianSpec(0.0, 2.0)
        m2 = VarianceChange(1.0, 2.0, 5.0)
        assert m2.metric(Hypothesis.H1).sigma2 == 5.0
        assert m2.with_actual_as_tuned().metric(Hypothesis.H1).sigma2 == 2.0
        assert m2.metric(Hypothesis.H0) == GaussianSpec(0.0, 1.0)


class TestTunedFromError:
    def test_case2_single_entry(self):
        assert tuned_from_error([(14.65, 2.78e-4)], 14.65) == 2.78e-4

    @given(st.floats(0, 100))
    def test_single_entry_clamps(self, eps):
        assert tuned_from_error([(14.65, 2.78e-4)], eps) == 2.78e-4

    def test_midpoint(self):
        assert tuned_from_error([(1.0, 1.0), (3.0, 3.0)], 2.0) == 2.0

    def test_clamp_both_ends(self):
        table = [(1.0, 10.0), (3.0, 30.0)]
        assert tuned_from_error(table, 0.0) == 10.0
        assert tuned_from_error(table, 9.0) == 30.0

    def test_tuple_values(self):
        out = tuned_from_error([(1.0, (0.1, 1.0)), (2.0, (0.3, 3.0))], 1.5)
        assert out == pytest.approx((0.2, 2.0))

    def test_empty(self):
        with pytest.raises(ConfigError):
            tuned_from_error([], 1.0)

    def test_non_increasing(self):
        with pytest.raises(ConfigError):
            tuned_from_error([(2.0, 1.0), (1.0, 2.0)], 1.0)
