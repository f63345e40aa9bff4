"""Amplitude error bars: ellipse extrema and bootstrap intervals."""

import math

import numpy as np
import pytest
from scipy.stats import chi2

from phasorstats import ComplexSample, amp_ci_bootstrap, amp_errors_ellipse
from phasorstats.exceptions import DegenerateCovariance, TooFewObservations


def whitened_sample(seed, n=24, mean=0j):
    """Sample with exactly isotropic unit covariance, shifted to `mean`."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    z = z - z.mean(axis=0)
    z = z @ np.linalg.inv(np.linalg.cholesky(np.cov(z.T))).T
    return ComplexSample(z[:, 0] + 1j * z[:, 1] + mean)


def dense_scan_bounds(sample, level, points=1_000_000):
    """Brute-force oracle: extremal |p| over a dense grid of ellipse points,
    sharpened by one parabolic interpolation step."""
    from phasorstats import covariance_summary

    summary = covariance_summary(sample)
    scale = chi2.ppf(level, df=2) / sample.n
    lmax, lmin = summary.eigenvalues
    v = summary.eigenvectors
    r1, r2 = math.sqrt(lmax * scale), math.sqrt(lmin * scale)
    theta = np.linspace(0.0, 2.0 * np.pi, points, endpoint=False)
    px = summary.mean[0] + r1 * np.cos(theta) * v[0, 0] + r2 * np.sin(theta) * v[0, 1]
    py = summary.mean[1] + r1 * np.cos(theta) * v[1, 0] + r2 * np.sin(theta) * v[1, 1]
    dist = np.hypot(px, py)

    def refine(idx, pick):
        step = 2.0 * np.pi / points
        ts = theta[idx] + np.array([-step, 0.0, step])
        ds = []
        for t in ts:
            x = summary.mean[0] + r1 * math.cos(t) * v[0, 0] + r2 * math.sin(t) * v[0, 1]
            y = summary.mean[1] + r1 * math.cos(t) * v[1, 0] + r2 * math.sin(t) * v[1, 1]
            ds.append(math.hypot(x, y))
        a, b, c = ds
        denom = a - 2 * b + c
        if denom == 0:
            return b
        t_star = ts[1] + 0.5 * step * (a - c) / denom
        x = summary.mean[0] + r1 * math.cos(t_star) * v[0, 0] + r2 * math.sin(t_star) * v[0, 1]
        y = summary.mean[1] + r1 * math.cos(t_star) * v[1, 0] + r2 * math.sin(t_star) * v[1, 1]
        return pick(b, math.hypot(x, y))

    return refine(int(dist.argmin()), min), refine(int(dist.argmax()), max)


class TestEllipse:
    def test_isotropic_bounds_are_mean_plus_minus_radius(self):
        s = whitened_sample(0, mean=3.0 + 0j)
        level = 0.68
        res = amp_errors_ellipse(s, level)
        r = math.sqrt(chi2.ppf(level, 2) / s.n)
        assert res.mean_amplitude == pytest.approx(3.0, abs=1e-9)
        assert res.error_low == pytest.approx(3.0 - r, abs=1e-9)
        assert res.error_high == pytest.approx(3.0 + r, abs=1e-9)

    def test_origin_inside_gives_zero_lower_bound(self):
        s = whitened_sample(1, mean=0j)
        res = amp_errors_ellipse(s, 0.95)
        assert res.error_low == 0.0
        assert res.error_high > 0.0

    def test_matches_dense_scan(self):
        rng = np.random.default_rng(2)
        for seed in range(5):
            z = rng.standard_normal((15, 2)) @ np.array([[1.5, 0.6], [0.0, 0.4]])
            s = ComplexSample(z[:, 0] + 1j * z[:, 1] + (1.2 - 0.8j))
            res = amp_errors_ellipse(s, 0.68)
            lo, hi = dense_scan_bounds(s, 0.68, points=100_000)
            assert res.error_high == pytest.approx(hi, rel=1e-4)
            if res.error_low > 0:
                assert res.error_low == pytest.approx(lo, rel=1e-4)

    def test_rotation_invariance_of_amplitude(self):
        s = whitened_sample(3, mean=2.0 + 1.0j)
        base = amp_errors_ellipse(s, 0.68)
        for angle in (0.3, 1.2, -2.0):
            rotated = ComplexSample(s.observations * np.exp(1j * angle))
            res = amp_errors_ellipse(rotated, 0.68)
            assert res.mean_amplitude == pytest.approx(
                base.mean_amplitude, rel=1e-9
            )
            assert res.error_low == pytest.approx(base.error_low, abs=1e-9)
            assert res.error_high == pytest.approx(base.error_high, abs=1e-9)

    def test_preconditions(self):
        with pytest.raises(TooFewObservations):
            amp_errors_ellipse(ComplexSample([1 + 1j, 2 + 2j]), 0.68)
        with pytest.raises(DegenerateCovariance):
            amp_errors_ellipse(
                ComplexSample([(x, 0) for x in (1.0, 2.0, 3.0)]), 0.68
            )


class TestBootstrap:
    def test_identical_observations(self):
        s = ComplexSample([(2.5, 0.0)] * 6)
        res = amp_ci_bootstrap(s, 0.68, n_boot=500, seed=4)
        assert res.error_low == pytest.approx(2.5)
        assert res.error_high == pytest.approx(2.5)

    def test_deterministic_for_seed(self):
        s = whitened_sample(5, mean=1.5 + 0.5j)
        a = amp_ci_bootstrap(s, 0.68, n_boot=2000, seed=42)
        b = amp_ci_bootstrap(s, 0.68, n_boot=2000, seed=42)
        assert (a.error_low, a.error_high) == (b.error_low, b.error_high)
        c = amp_ci_bootstrap(s, 0.68, n_boot=2000, seed=43)
        assert (a.error_low, a.error_high) != (c.error_low, c.error_high)

    def test_halfwidth_tracks_analytic_se(self):
        # isotropic N=50 with component SD sigma: the 68% interval
        # half-width should be close to sigma / sqrt(N)
        sigma = 2.0
        s = ComplexSample(
            whitened_sample(6, n=50, mean=0j).observations * sigma + 10.0
        )
        res = amp_ci_bootstrap(s, 0.68, n_boot=20000, seed=7)
        half = 0.5 * (res.error_high - res.error_low)
        assert half == pytest.approx(sigma / math.sqrt(50), rel=0.15)

    def test_rotation_leaves_amplitude_interval(self):
        # identical resample indices on rotated data give identical
        # amplitude draws, so the bounds match exactly
        s = whitened_sample(8, mean=1.0 + 1.0j)
        base = amp_ci_bootstrap(s, 0.68, n_boot=1000, seed=9)
        rotated = ComplexSample(s.observations * np.exp(0.7j))
        res = amp_ci_bootstrap(rotated, 0.68, n_boot=1000, seed=9)
        assert res.error_low == pytest.approx(base.error_low, rel=1e-12)
        assert res.error_high == pytest.approx(base.error_high, rel=1e-12)

    def test_bounds_bracket_resample_median(self):
        s = whitened_sample(10, n=30, mean=2.0 + 0j)
        hits = 0
        for seed in range(40):
            res = amp_ci_bootstrap(s, 0.68, n_boot=2000, seed=seed)
            rng = np.random.default_rng(seed)
            idx = rng.integers(0, s.n, size=(2000, s.n))
            med = float(np.median(np.abs(s.observations[idx].mean(axis=1))))
            if res.error_low <= med <= res.error_high:
                hits += 1
        assert hits >= 38
