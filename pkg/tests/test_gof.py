import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renyigof.censoring import CensoringScheme, ProgressiveSample, generate_progressive_sample
from renyigof.distributions import Exponential, Gamma, Weibull
from renyigof.entropy import NumericalCancellation
from renyigof.gof import (
    StatisticKind,
    mle_exponential_scale,
    renyi_test_statistic,
    rkl_information,
    rkl_statistic_generic,
    shannon_test_statistic,
    statistic_batch,
)
from renyigof.mc import McConfig, PowerCell, TAG_NULL, power_study, simulate_statistics

from oracles import renyi_straight, shannon_straight

censored = st.lists(st.integers(0, 4), min_size=2, max_size=8).filter(lambda R: sum(R) > 0)


def _sample(scheme, seed, dist=Exponential()):
    return generate_progressive_sample(scheme, dist, np.random.default_rng(seed))


class TestMle:
    def test_nelson(self, nelson):
        assert mle_exponential_scale(nelson) == pytest.approx(72.69 / 8, rel=1e-14)
        assert round(mle_exponential_scale(nelson), 2) == 9.09

    def test_complete_is_mean(self):
        x = np.array([0.5, 1.0, 2.5, 4.0])
        assert mle_exponential_scale(ProgressiveSample(CensoringScheme.complete(4), x)) == pytest.approx(x.mean())

    def test_single_failure(self):
        s = ProgressiveSample(CensoringScheme(7, 1, (6,)), [0.3])
        assert mle_exponential_scale(s) == pytest.approx(7 * 0.3)

    def test_rejects_nonpositive(self):
        s = ProgressiveSample(CensoringScheme.complete(3), [-1.0, 0.5, 2.0])
        with pytest.raises(ValueError, match=r"x\[0\]"):
            mle_exponential_scale(s)


class TestRenyiStatistic:
    def test_nelson_against_straight_line(self, nelson):
        theta = 72.69 / 8
        h = renyi_straight(list(nelson.x), 19, list(nelson.scheme.R), 0.4, 3)
        expected = -h / 19 + 8 / 19 * (math.log(theta) + 1)
        stat = renyi_test_statistic(nelson, 0.4, 3)
        assert stat.value == pytest.approx(expected, abs=1e-12)
        assert stat.kind is StatisticKind.RENYI and stat.alpha == 0.4 and stat.w == 3

    @settings(max_examples=50, deadline=None)
    @given(censored, st.floats(1e-3, 1e3), st.integers(0, 2**32 - 1), st.floats(0.1, 0.9))
    def test_scale_invariant(self, R, c, seed, alpha):
        s = _sample(CensoringScheme.from_removals(R), seed)
        w = max(1, s.scheme.m // 3)
        try:
            base = renyi_test_statistic(s, alpha, w).value
        except NumericalCancellation:
            return
        assert renyi_test_statistic(s.scaled(c), alpha, w).value == pytest.approx(base, abs=1e-11)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(0, 4), min_size=2, max_size=10), st.floats(0.01, 1.0), st.integers(0, 2**32 - 1),
           st.integers(1, 9))
    def test_finite_or_clean_error(self, R, alpha, seed, w):
        scheme = CensoringScheme.from_removals(R)
        w = min(w, scheme.m - 1)
        s = _sample(scheme, seed, Weibull(0.5))
        if alpha == 1.0:
            alpha = 0.999
        try:
            value = renyi_test_statistic(s, alpha, w).value
        except NumericalCancellation:
            return
        assert math.isfinite(value)

    def test_batch_matches_single(self, nelson):
        rows = np.vstack([nelson.x, 0.5 * nelson.x])
        batch = statistic_batch(rows, nelson.scheme, "renyi", 3, 0.4)
        assert batch[0] == pytest.approx(renyi_test_statistic(nelson, 0.4, 3).value, abs=1e-14)
        assert batch[1] == pytest.approx(batch[0], abs=1e-13)

    def test_batch_needs_alpha(self, nelson):
        with pytest.raises(ValueError):
            statistic_batch(nelson.x[None, :], nelson.scheme, "renyi", 3)

    def test_alpha_near_one_median_below_alpha_04(self):
        # T^alpha - T depends on the scheme and alpha only, so the comparison is exact
        scheme = CensoringScheme.right_censored(20, 10)
        near_one = simulate_statistics(scheme, Exponential(), "renyi", 0.99, 2, 2000, 11, TAG_NULL)
        default = simulate_statistics(scheme, Exponential(), "renyi", 0.4, 2, 2000, 11, TAG_NULL)
        assert np.median(near_one) < np.median(default)
        np.testing.assert_allclose(near_one - default, (near_one - default)[0], atol=1e-12)

    def test_complete_twenty_alpha_near_one(self):
        scheme = CensoringScheme.complete(20)
        values = simulate_statistics(scheme, Exponential(), "renyi", 0.99, 2, 2000, 11, TAG_NULL)
        assert np.all(np.isfinite(values))
        with pytest.raises(NumericalCancellation):
            simulate_statistics(scheme, Exponential(), "renyi", 0.4, 2, 10, 11, TAG_NULL)


class TestShannonStatistic:
    def test_nelson_against_straight_line(self, nelson):
        h = shannon_straight(list(nelson.x), 19, list(nelson.scheme.R), 3)
        expected = -h + 8 / 19 * (math.log(72.69 / 8) + 1)
        stat = shannon_test_statistic(nelson, 3)
        assert stat.value == pytest.approx(expected, abs=1e-13)
        assert stat.alpha is None

    @settings(max_examples=50, deadline=None)
    @given(censored, st.floats(1e-3, 1e3), st.integers(0, 2**32 - 1))
    def test_scale_invariant(self, R, c, seed):
        s = _sample(CensoringScheme.from_removals(R), seed)
        base = shannon_test_statistic(s, 1).value
        assert shannon_test_statistic(s.scaled(c), 1).value == pytest.approx(base, abs=1e-11)

    def test_constant_offset_to_renyi(self, nelson_scheme):
        # same data-dependent part with the same window: T^alpha - T is a constant
        diffs = []
        for seed in range(20):
            s = _sample(nelson_scheme, seed, Gamma(2.0))
            diffs.append(renyi_test_statistic(s, 0.4, 3).value - shannon_test_statistic(s, 3).value)
        np.testing.assert_allclose(diffs, diffs[0], atol=1e-12)

    def test_power_gamma2_table1(self):
        cfg = McConfig(reps=10_000, seed=314, level=0.10)
        scheme = CensoringScheme.from_removals((5, 0, 0, 0, 0))
        row = power_study([PowerCell(scheme, Gamma(2.0), "shannon")], cfg).rows[0]
        assert row.power == pytest.approx(0.406, abs=0.03)


class TestGenericStatistic:
    @settings(max_examples=50, deadline=None)
    @given(censored, st.integers(0, 2**32 - 1), st.floats(0.1, 0.9))
    def test_reduces_to_exponentiality_statistic(self, R, seed, alpha):
        s = _sample(CensoringScheme.from_removals(R), seed)
        w = max(1, s.scheme.m // 2)
        try:
            direct = renyi_test_statistic(s, alpha, w)
        except NumericalCancellation:
            return
        d = Exponential(direct.theta_hat)
        generic = rkl_statistic_generic(s, d.pdf, d.cdf, alpha, w, null_sf=d.sf)
        assert generic.value == pytest.approx(direct.value, abs=1e-12)
        generic_cdf = rkl_statistic_generic(s, d.pdf, d.cdf, alpha, w)
        assert generic_cdf.value == pytest.approx(direct.value, abs=1e-10)

    def test_information_is_n_times_statistic(self, nelson):
        d = Exponential(9.0)
        info = rkl_information(nelson, d.pdf, d.cdf, 0.4, 3)
        assert info == pytest.approx(19 * rkl_statistic_generic(nelson, d.pdf, d.cdf, 0.4, 3).value)

    def test_uncensored_drops_survival_sum(self):
        s = ProgressiveSample(CensoringScheme.complete(4), [0.2, 0.5, 1.1, 2.0])
        d = Exponential()

        def cdf_never(_):
            raise AssertionError("CDF must not be evaluated without censoring")

        stat = rkl_statistic_generic(s, d.pdf, cdf_never, 1.5, 1)
        assert math.isfinite(stat.value)

    def test_cdf_equal_one_rejected(self, nelson):
        d = Exponential()
        with pytest.raises(ValueError, match=r"x\[7\]"):
            rkl_statistic_generic(nelson, d.pdf, lambda x: np.where(x > 7, 1.0, d.cdf(x)), 0.4, 3)

    def test_zero_density_rejected(self, nelson):
        with pytest.raises(ValueError, match=r"x\[0\]"):
            rkl_statistic_generic(nelson, lambda x: np.where(x < 0.5, 0.0, 1.0), lambda x: 0.5 * x / 10, 0.4, 3)

    def test_true_weibull_null_smaller_than_exponential(self):
        scheme = CensoringScheme.from_removals((0, 2, 0, 0, 3, 0, 0, 5))
        true, expo = [], []
        w_null = Weibull(2.0)
        for seed in range(500):
            s = _sample(scheme, seed, w_null)
            true.append(rkl_statistic_generic(s, w_null.pdf, w_null.cdf, 0.4, 3, null_sf=w_null.sf).value)
            expo.append(renyi_test_statistic(s, 0.4, 3).value)
        assert np.median(true) < np.median(expo)


class TestStatisticRecord:
    def test_to_dict(self, nelson):
        doc = renyi_test_statistic(nelson, 0.4, 3).to_dict()
        assert doc["kind"] == "renyi" and doc["w"] == 3 and doc["theta_hat"] == pytest.approx(9.08625)

    def test_kind_parse(self):
        assert StatisticKind.parse("Shannon") is StatisticKind.SHANNON
        with pytest.raises(ValueError):
            StatisticKind.parse("ks")
