"""Tests for the hybrid band and the per-replication band pair."""

import math

import numpy as np
import pytest

from concate.concentration import Truncation
from concate.errors import DataError, DegenerateArmError, ValidationError
from concate.estimators import split_arms
from concate.hybrid import MC_DESIGNS, hybrid_band, replication_bands
from concate.manski import (
    bound_gradients,
    extrema_support,
    manski_region,
    sampling_covariance,
)
from concate.stats import norm_ppf


def stats_from(treated_values, control_values):
    y = np.concatenate([treated_values, control_values]).astype(float)
    z = np.concatenate(
        [np.ones(len(treated_values), dtype=bool), np.zeros(len(control_values), dtype=bool)]
    )
    return split_arms(y, z)


def random_stats(rng, n_lo=20, n_hi=200, positive=False):
    while True:
        n = int(rng.integers(n_lo, n_hi))
        z = rng.random(n) < rng.uniform(0.3, 0.7)
        if 2 <= z.sum() <= n - 2:
            y = rng.chisquare(3, n) if positive else rng.standard_normal(n)
            return split_arms(y * rng.uniform(0.5, 3.0), z)


class TestHybridBand:
    def test_multiplier(self):
        rng = np.random.default_rng(120)
        band = hybrid_band(random_stats(rng), 0.05)
        assert abs(band.multiplier - 2.241403) < 1e-6
        assert band.multiplier == norm_ppf(1.0 - 0.05 / 4.0)

    def test_assembly_identity(self):
        rng = np.random.default_rng(121)
        for _ in range(50):
            s = random_stats(rng)
            band = hybrid_band(s, 0.05)
            padded_region = manski_region(s, band.support)
            assert band.region.lower == padded_region.lower
            assert abs(band.lower - (padded_region.lower - band.multiplier * band.se_lower)) < 1e-12
            assert abs(band.upper - (padded_region.upper + band.multiplier * band.se_upper)) < 1e-12

    def test_per_endpoint_ses_use_the_padded_support(self):
        rng = np.random.default_rng(122)
        s = random_stats(rng)
        band = hybrid_band(s, 0.05)
        cov = sampling_covariance(s)
        grad_lower, grad_upper = bound_gradients(s, band.support)
        assert abs(band.se_lower - math.sqrt(grad_lower @ cov @ grad_lower)) < 1e-15
        assert abs(band.se_upper - math.sqrt(grad_upper @ cov @ grad_upper)) < 1e-15

    def test_support_padding_formula(self):
        rng = np.random.default_rng(123)
        s = random_stats(rng)
        band = hybrid_band(s, 0.05, c_alpha=0.5)
        expected = 3.0 * math.sqrt(2.0 * math.log(8.0 / 0.05) / s.n_treated)
        assert abs(band.paddings.eps_treated - expected) < 1e-15
        assert band.support.upper_treated == s.max_treated + band.paddings.eps_treated
        assert band.support.lower_treated == s.min_treated - band.paddings.eps_treated

    def test_strictly_contains_the_plugin_region(self):
        rng = np.random.default_rng(124)
        for positive in (False, True):
            for _ in range(250):
                s = random_stats(rng, positive=positive)
                band = hybrid_band(s, 0.05)
                region = manski_region(s, extrema_support(s))
                assert band.lower < region.lower
                assert band.upper > region.upper

    def test_band_approaches_the_region_as_n_grows(self):
        rng = np.random.default_rng(125)
        gaps = []
        for n in (100, 10_000, 1_000_000):
            y = rng.chisquare(3, n)
            z = rng.random(n) < 0.5
            s = split_arms(y, z)
            band = hybrid_band(s, 0.05)
            region = manski_region(s, extrema_support(s))
            gaps.append(band.width - region.width)
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.1

    def test_width_monotone_in_c_alpha(self):
        rng = np.random.default_rng(126)
        s = random_stats(rng)
        widths = [hybrid_band(s, 0.05, c_alpha=c).width for c in (0.0, 0.5, 1.0, 2.0)]
        assert all(a < b for a, b in zip(widths, widths[1:]))

    def test_width_monotone_as_alpha_shrinks(self):
        rng = np.random.default_rng(127)
        s = random_stats(rng)
        widths = [hybrid_band(s, a).width for a in (0.2, 0.1, 0.05, 0.01)]
        assert all(a < b for a, b in zip(widths, widths[1:]))

    def test_lower_known_halves_the_budget_and_skips_lower_padding(self):
        rng = np.random.default_rng(128)
        s = random_stats(rng, positive=True)
        band = hybrid_band(s, 0.05, truncation=Truncation.lower_known(0.0))
        assert band.support.lower_treated == 0.0
        assert band.support.lower_control == 0.0
        assert band.support.source == "padded-lower-known"
        # one-sided support events: budget 8 -> 4, dependence-adjusted form
        expected = math.sqrt(2.0 * math.log(4.0 / 0.05) / s.n_treated)
        assert abs(band.paddings.eps_treated - expected) < 1e-15

    def test_inconsistent_lower_limit_raises(self):
        s = stats_from([1.0, 2.0], [3.0, 4.0])
        with pytest.raises(DataError):
            hybrid_band(s, 0.05, truncation=Truncation.lower_known(1.5))

    def test_both_known_reduces_to_delta_method(self):
        rng = np.random.default_rng(129)
        s = random_stats(rng)
        lo = float(min(s.min_treated, s.min_control)) - 1.0
        hi = float(max(s.max_treated, s.max_control)) + 1.0
        band = hybrid_band(s, 0.05, truncation=Truncation.both_known(lo, hi))
        assert band.reduced_to_delta_method
        # the reduction inherits the delta-method budget, not alpha_u / 4
        assert band.multiplier == norm_ppf(1.0 - 0.05 / 2.0)
        assert band.support.source == "known"

    def test_validation(self):
        s = stats_from([1.0, 2.0], [3.0, 4.0])
        with pytest.raises(ValidationError):
            hybrid_band(s, 0.0)
        with pytest.raises(ValidationError):
            hybrid_band(s, 0.05, c_alpha=-1.0)
        with pytest.raises(DegenerateArmError):
            hybrid_band(stats_from([1.0], [2.0, 3.0]), 0.05)
        with pytest.raises(DegenerateArmError):
            hybrid_band(split_arms(np.ones(4), np.ones(4, dtype=bool)), 0.05)


class TestReplicationBands:
    def test_design_list(self):
        assert MC_DESIGNS == ("A", "B", "C", "D", "E", "F", "G")

    def test_known_support_design_is_plugin_bit_for_bit(self):
        rng = np.random.default_rng(130)
        y0 = rng.uniform(-5.0, 5.0, 50)
        d = rng.random(50) < 0.3
        y = np.where(d, np.clip(y0 + 4.0, -5.0, 5.0), y0)
        bands = replication_bands(y0, y, d, 0.05, "G")
        assert bands.hybrid_lower == bands.manski_lower
        assert bands.hybrid_upper == bands.manski_upper
        assert bands.support_lower == -5.0 and bands.support_upper == 5.0
        assert bands.epsilon == 0.0 and bands.se_lower == 0.0

    def test_known_support_design_allows_single_observation_arms(self):
        y0 = np.array([-1.0, 0.0, 1.0, 2.0])
        d = np.array([True, False, False, False])
        bands = replication_bands(y0, y0, d, 0.05, "G")
        assert bands.hybrid_lower == bands.manski_lower

    def test_pooled_epsilon_anchor(self):
        rng = np.random.default_rng(131)
        y0 = rng.standard_normal(50)
        d = rng.random(50) < 0.3
        while not 2 <= d.sum() <= 48:
            d = rng.random(50) < 0.3
        y = y0 + 4.0 * d
        bands = replication_bands(y0, y, d, 0.05, "A")
        assert abs(bands.epsilon - 0.192065) < 1e-6
        assert abs(bands.epsilon - math.sqrt(math.log(40.0) / 100.0)) < 1e-15

    def test_one_sided_design_uses_smaller_log_constant(self):
        rng = np.random.default_rng(132)
        y0 = rng.chisquare(3, 60)
        d = rng.random(60) < 0.3
        while not 2 <= d.sum() <= 58:
            d = rng.random(60) < 0.3
        y = y0 + 4.0 * d
        bands = replication_bands(y0, y, d, 0.05, "F")
        assert abs(bands.epsilon - math.sqrt(math.log(20.0) / 120.0)) < 1e-15
        assert bands.support_lower == 0.0
        assert bands.support_upper == y0.max()

    def test_supports_come_from_the_baseline_not_the_outcome(self):
        rng = np.random.default_rng(133)
        y0 = rng.standard_normal(80)
        d = rng.random(80) < 0.3
        while not 2 <= d.sum() <= 78:
            d = rng.random(80) < 0.3
        y = y0 + 100.0 * d
        bands = replication_bands(y0, y, d, 0.05, "A")
        assert bands.support_lower == y0.min()
        assert bands.support_upper == y0.max()

    def test_hybrid_assembly(self):
        rng = np.random.default_rng(134)
        y0 = rng.standard_normal(100)
        d = rng.random(100) < 0.3
        while not 2 <= d.sum() <= 98:
            d = rng.random(100) < 0.3
        y = y0 + 4.0 * d
        bands = replication_bands(y0, y, d, 0.05, "B")
        z = norm_ppf(1.0 - 0.05 / 4.0)
        scale = math.hypot(bands.se_lower, bands.se_upper)
        assert abs(bands.hybrid_lower - (bands.manski_lower - bands.epsilon - z * scale)) < 1e-12
        assert abs(bands.hybrid_upper - (bands.manski_upper + bands.epsilon + z * scale)) < 1e-12
        assert bands.hybrid_lower < bands.manski_lower
        assert bands.hybrid_upper > bands.manski_upper

    def test_endpoint_ses_coincide_under_a_common_support(self):
        """With both arms sharing one support the two endpoint gradients
        give the same quadratic form, so the SEs agree."""
        rng = np.random.default_rng(135)
        for _ in range(50):
            n = int(rng.integers(20, 150))
            y0 = rng.standard_normal(n)
            d = rng.random(n) < 0.3
            if not 2 <= d.sum() <= n - 2:
                continue
            bands = replication_bands(y0, y0 + 4.0 * d, d, 0.05, "A")
            assert abs(bands.se_lower - bands.se_upper) < 1e-12 * max(bands.se_lower, 1e-9)

    def test_empty_arm_raises(self):
        y0 = np.zeros(10)
        with pytest.raises(DegenerateArmError):
            replication_bands(y0, y0, np.zeros(10, dtype=bool), 0.05, "A")

    def test_single_observation_arm_raises_outside_known_support(self):
        y0 = np.arange(10.0)
        d = np.zeros(10, dtype=bool)
        d[0] = True
        with pytest.raises(DegenerateArmError):
            replication_bands(y0, y0, d, 0.05, "A")

    def test_design_and_alpha_validation(self):
        y0 = np.arange(10.0)
        d = np.array([True] * 5 + [False] * 5)
        with pytest.raises(ValidationError):
            replication_bands(y0, y0, d, 0.05, "H")
        with pytest.raises(ValidationError):
            replication_bands(y0, y0, d, 0.0, "A")
