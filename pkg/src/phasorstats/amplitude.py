"""Coherent amplitude summaries with error bars.

Two methods for putting bounds on the amplitude of a coherent mean:

- ``amp_errors_ellipse``: nearest and farthest points from the origin on the
  standard-error ellipse of the mean (after Pei et al., 2017). When the
  origin falls inside the ellipse the lower bound is zero.
- ``amp_ci_bootstrap``: percentile interval of resampled mean amplitudes;
  the 68% interval corresponds to a standard error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .data import ComplexSample, covariance_summary
from .exceptions import DegenerateCovariance, TooFewObservations

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class AmplitudeSummary:
    """Amplitude of the coherent mean with lower/upper error bounds."""

    mean_amplitude: float
    mean_phase: float
    error_low: float
    error_high: float
    method: str
    level: float

    def to_dict(self) -> dict:
        return {
            "mean_amplitude": self.mean_amplitude,
            "mean_phase": self.mean_phase,
            "error_low": self.error_low,
            "error_high": self.error_high,
            "method": self.method,
            "level": self.level,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AmplitudeSummary":
        return cls(**d)


def _golden_min(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section minimum of f on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _extremal_distance(f, sign: float) -> float:
    """Extremal value of the distance function f over the angle parameter.

    Golden-section refinement from the three best cells of a coarse grid;
    the distance from a fixed point to an ellipse has at most two local
    minima, so three restarts cover every candidate basin.
    """
    grid = np.linspace(0.0, 2.0 * math.pi, 49)
    values = np.array([sign * f(t) for t in grid])
    step = grid[1] - grid[0]
    best = math.inf
    for i in np.argsort(values)[:3]:
        t = _golden_min(lambda x: sign * f(x), grid[i] - step, grid[i] + step)
        best = min(best, sign * f(t))
    return sign * best


def amp_errors_ellipse(sample: ComplexSample, level: float = 0.68) -> AmplitudeSummary:
    """Amplitude bounds from the standard-error ellipse of the mean.

    The ellipse is the covariance of the mean (sample covariance / N)
    scaled by the chi-square quantile for ``level``; bounds are its extremal
    distances from the origin, found by golden-section search over the
    ellipse angle. If the origin lies inside the ellipse, error_low is 0.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    if sample.n < 3:
        raise TooFewObservations(
            f"ellipse error bars need >= 3 observations, got {sample.n}"
        )
    summary = covariance_summary(sample)
    if summary.degenerate:
        raise DegenerateCovariance("sample covariance is degenerate")
    scale = chi2.ppf(level, df=2) / sample.n
    lmax, lmin = summary.eigenvalues
    vmax = summary.eigenvectors[:, 0]
    vmin = summary.eigenvectors[:, 1]
    r1 = math.sqrt(lmax * scale)
    r2 = math.sqrt(lmin * scale)
    center = np.array(summary.mean)

    def point(theta: float) -> np.ndarray:
        return center + r1 * math.cos(theta) * vmax + r2 * math.sin(theta) * vmin

    def dist(theta: float) -> float:
        p = point(theta)
        return math.hypot(p[0], p[1])

    # origin inside the ellipse <=> its Mahalanobis distance from the
    # center, in ellipse-axis units, is below 1
    u = ((center @ vmax) / r1) ** 2 + ((center @ vmin) / r2) ** 2
    high = _extremal_distance(dist, -1.0)
    low = 0.0 if u <= 1.0 else _extremal_distance(dist, 1.0)
    amp = math.hypot(center[0], center[1])
    return AmplitudeSummary(
        mean_amplitude=amp,
        mean_phase=math.atan2(center[1], center[0]),
        error_low=low,
        error_high=high,
        method="ellipse_se",
        level=level,
    )


def amp_ci_bootstrap(
    sample: ComplexSample,
    level: float = 0.68,
    n_boot: int = 10000,
    seed=0,
) -> AmplitudeSummary:
    """Percentile bootstrap confidence interval for the mean amplitude.

    Resamples the complex observations with replacement, takes the
    amplitude of each resampled coherent mean, and reads the bounds at the
    (1 -/+ level)/2 quantiles. Deterministic for a given seed.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    if sample.n < 2:
        raise TooFewObservations(
            f"bootstrap needs >= 2 observations, got {sample.n}"
        )
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, sample.n, size=(int(n_boot), sample.n))
    amps = np.abs(sample.observations[idx].mean(axis=1))
    lo, hi = np.quantile(amps, [(1.0 - level) / 2.0, (1.0 + level) / 2.0])
    mean = sample.observations.mean()
    return AmplitudeSummary(
        mean_amplitude=abs(mean),
        mean_phase=math.atan2(mean.imag, mean.real),
        error_low=float(lo),
        error_high=float(hi),
        method="bootstrap",
        level=level,
    )
