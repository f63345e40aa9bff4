"""F distribution and the condition-index null distribution."""

import math

import numpy as np
import pytest

from phasorstats import ConditionIndexDistribution, f_cdf, f_critical
from phasorstats.exceptions import DomainError


class TestFCdf:
    def test_bounds(self):
        assert f_cdf(0.0, 2, 10) == 0.0
        assert f_cdf(math.inf, 2, 10) == 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            f_cdf(-0.1, 2, 10)
        with pytest.raises(DomainError):
            f_cdf(1.0, 0, 10)

    def test_reported_mouse_p(self):
        # F(2, 10) = 8.32 corresponds to p about 0.007
        p = 1.0 - f_cdf(8.32, 2, 10)
        assert abs(p - 0.007) < 1e-3

    def test_monotone(self):
        xs = np.linspace(0.0, 12.0, 40)
        values = [f_cdf(x, 3, 7) for x in xs]
        assert all(b >= a for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("df", [(2, 10), (2, 176)])
    def test_against_monte_carlo(self, df):
        # oracle: empirical CDF of F draws from numpy's generator
        rng = np.random.default_rng(1234)
        draws = rng.f(df[0], df[1], size=200000)
        for x in np.linspace(0.2, 5.0, 10):
            assert f_cdf(x, *df) == pytest.approx(
                float((draws <= x).mean()), abs=0.005
            )

    def test_critical_inverts(self):
        for alpha in (0.05, 0.0083):
            crit = f_critical(alpha, 2, 176)
            assert 1.0 - f_cdf(crit, 2, 176) == pytest.approx(alpha, abs=1e-9)


class TestConditionIndexDistribution:
    def test_pdf_zero_at_one(self):
        for variant in ("edelman", "modified"):
            dist = ConditionIndexDistribution(5, variant)
            assert dist.pdf(1.0) == 0.0

    def test_pdf_tail_decay(self):
        dist = ConditionIndexDistribution(6)
        assert dist.pdf(1e6) < 1e-12

    def test_domain(self):
        dist = ConditionIndexDistribution(4)
        with pytest.raises(DomainError):
            dist.pdf(0.5)
        with pytest.raises(DomainError):
            dist.cdf(0.99)
        with pytest.raises(DomainError):
            dist.quantile(1.0)
        with pytest.raises(DomainError):
            ConditionIndexDistribution(2)

    @pytest.mark.parametrize("variant", ["edelman", "modified"])
    def test_normalization_all_n(self, variant):
        from scipy.integrate import quad

        for n in range(3, 65):
            dist = ConditionIndexDistribution(n, variant)
            total = quad(dist.pdf, 1.0, np.inf, epsabs=1e-12, limit=200)[0]
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_cdf_bounds_and_monotone(self):
        dist = ConditionIndexDistribution(8)
        assert dist.cdf(1.0) == 0.0
        xs = [1.0, 1.2, 1.5, 2.0, 3.0, 6.0, 20.0]
        values = [dist.cdf(x) for x in xs]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[-1] < 1.0
        assert dist.cdf(math.inf) == 1.0

    def test_sf_complements_cdf(self):
        dist = ConditionIndexDistribution(6)
        for x in (1.1, 1.59, 2.5, 8.0):
            assert dist.sf(x) == pytest.approx(1.0 - dist.cdf(x), abs=1e-8)

    def test_closed_form_cdf_n6(self):
        # independent oracle: for n = 6 (modified) the density is
        # 64 x^3 (x^2 - 1) / (x^2 + 1)^5, whose antiderivative in
        # w = x^2 + 1 is 32(-w^-2/2 + w^-3 - w^-4/2); hand-integrated
        dist = ConditionIndexDistribution(6, "modified")

        def closed_cdf(x):
            w = x * x + 1.0
            anti = 32.0 * (-0.5 / w**2 + 1.0 / w**3 - 0.5 / w**4)
            return anti + 1.0  # the constant makes cdf(1) = 0

        for x in (1.2, 1.59, 1.69, 2.5, 4.0):
            assert dist.cdf(x) == pytest.approx(closed_cdf(x), abs=1e-9)

    def test_quantile_bounds_and_roundtrip(self):
        for n in (3, 4, 6, 16, 64):
            dist = ConditionIndexDistribution(n)
            assert dist.quantile(0.0) == 1.0
            assert dist.quantile(0.5) < dist.quantile(0.95)
            for p in (0.5, 0.95):
                assert dist.cdf(dist.quantile(p)) == pytest.approx(p, abs=1e-8)

    def test_quantile_matches_simulated_percentile(self):
        # Monte Carlo oracle at n = 10: the analytic 95th percentile must
        # sit within 1% of the empirical one from 1e5 null samples
        rng = np.random.default_rng(77)
        z = rng.standard_normal((100000, 10, 2))
        mean = z.mean(axis=1, keepdims=True)
        d = z - mean
        a = (d[:, :, 0] ** 2).sum(1)
        c = (d[:, :, 1] ** 2).sum(1)
        b = (d[:, :, 0] * d[:, :, 1]).sum(1)
        half = 0.5 * (a + c)
        disc = np.sqrt((0.5 * (a - c)) ** 2 + b * b)
        ci = np.sqrt((half + disc) / (half - disc))
        dist = ConditionIndexDistribution(10, "modified")
        assert dist.quantile(0.95) == pytest.approx(
            float(np.quantile(ci, 0.95)), rel=0.01
        )

    def test_mouse_p_values(self):
        dist = ConditionIndexDistribution(6, "modified")
        assert dist.sf(1.59) == pytest.approx(0.66, abs=0.005)
        assert dist.sf(1.69) == pytest.approx(0.59, abs=0.005)

    def test_variants_agree_for_large_n(self):
        ede = ConditionIndexDistribution(64, "edelman").quantile(0.95)
        mod = ConditionIndexDistribution(64, "modified").quantile(0.95)
        assert abs(ede - mod) / mod < 0.02
