"""Mahalanobis-distance outlier screening and the pairwise effect size.

The distance of an observation from its sample mean, scaled by the
covariance in that direction, flags multivariate outliers; values above 3
are the bivariate analogue of points more than 3 standard deviations out.
Between two group means the same construction with a pooled covariance
gives a multivariate analogue of Cohen's d (Del Giudice, 2009).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import (
    DEGENERACY_RTOL,
    ComplexSample,
    Design,
    GroupedDataset,
    UNIT_ALIGNED_DESIGNS,
    _eig2x2,
    covariance_summary,
)
from .exceptions import DegenerateCovariance, TooFewObservations

DEFAULT_THRESHOLD = 3.0


@dataclass(frozen=True)
class OutlierReport:
    """Per-observation distances for one condition's sample."""

    condition: str
    distances: tuple[float, ...]
    flagged: tuple[int, ...]
    threshold: float

    @property
    def flagged_count(self) -> int:
        return len(self.flagged)


@dataclass(frozen=True)
class ScreeningReport:
    """Outcome of screening a whole dataset.

    ``excluded_units`` is filled for unit-aligned designs (whole units are
    removed from every condition); independent designs remove flagged
    observations one by one and leave it empty.
    """

    per_condition: tuple[OutlierReport, ...]
    excluded_units: tuple[str, ...]
    threshold: float

    @property
    def n_flagged(self) -> int:
        return sum(r.flagged_count for r in self.per_condition)


def _distances(sample: ComplexSample) -> np.ndarray:
    summary = covariance_summary(sample)
    if sample.n < 3:
        raise TooFewObservations(
            f"Mahalanobis distances need >= 3 observations, got {sample.n}"
        )
    if summary.degenerate:
        raise DegenerateCovariance(
            f"covariance of condition {sample.condition_label!r} is degenerate"
        )
    a, b = summary.cov[0]
    _, c = summary.cov[1]
    det = a * c - b * b
    dre = sample.observations.real - summary.mean[0]
    dim = sample.observations.imag - summary.mean[1]
    d2 = (c * dre * dre - 2.0 * b * dre * dim + a * dim * dim) / det
    return np.sqrt(np.maximum(d2, 0.0))


def mahalanobis_distances(
    sample: ComplexSample, threshold: float = DEFAULT_THRESHOLD
) -> OutlierReport:
    """Distance of each observation from the sample mean, as D (not D^2).

    Raises DegenerateCovariance when the covariance cannot be inverted and
    TooFewObservations below N = 3.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    d = _distances(sample)
    flagged = tuple(int(i) for i in np.nonzero(d > threshold)[0])
    return OutlierReport(
        condition=sample.condition_label,
        distances=tuple(float(x) for x in d),
        flagged=flagged,
        threshold=threshold,
    )


def exclude_outliers(
    dataset: GroupedDataset, threshold: float = DEFAULT_THRESHOLD
) -> tuple[GroupedDataset, ScreeningReport]:
    """Single-pass outlier screening of every condition.

    Distances are computed once per condition with all points included
    (no re-screening of the reduced data). In unit-aligned designs any unit
    that contributes at least one flagged observation is removed from all
    conditions; otherwise flagged observations are dropped individually.
    Conditions too small (N < 3) or degenerate are left unscreened.
    """
    reports = []
    for s in dataset.samples:
        try:
            reports.append(mahalanobis_distances(s, threshold))
        except (TooFewObservations, DegenerateCovariance):
            reports.append(
                OutlierReport(s.condition_label, tuple(), tuple(), threshold)
            )
    unit_level = dataset.design in UNIT_ALIGNED_DESIGNS or (
        dataset.design is Design.ONE_SAMPLE
        and dataset.samples[0].unit_labels is not None
    )
    if unit_level:
        excluded: set[str] = set()
        for s, rep in zip(dataset.samples, reports):
            excluded.update(s.unit_labels[i] for i in rep.flagged)
        new_samples = []
        for s in dataset.samples:
            keep = [i for i, u in enumerate(s.unit_labels) if u not in excluded]
            new_samples.append(s.subset(keep))
        # preserve input order of the first condition's labels
        ordered = tuple(
            u for u in dataset.samples[0].unit_labels if u in excluded
        )
        report = ScreeningReport(tuple(reports), ordered, threshold)
    else:
        new_samples = []
        for s, rep in zip(dataset.samples, reports):
            keep = [i for i in range(s.n) if i not in rep.flagged]
            new_samples.append(s.subset(keep))
        report = ScreeningReport(tuple(reports), tuple(), threshold)
    if any(s.n == 0 for s in new_samples):
        warnings.warn("outlier screening removed every observation of a condition")
    screened = GroupedDataset(tuple(new_samples), dataset.design, dataset.mu)
    return screened, report


def pooled_covariance(a: ComplexSample, b: ComplexSample) -> np.ndarray:
    """(N-1)-weighted pooled 2x2 covariance of two samples."""
    sa = covariance_summary(a)
    sb = covariance_summary(b)
    wa, wb = a.n - 1, b.n - 1
    return (wa * sa.cov + wb * sb.cov) / (wa + wb)


def pairwise_mahalanobis(a: ComplexSample, b: ComplexSample) -> float:
    """Distance between two group means in pooled-covariance units.

    A multivariate effect size equivalent to Cohen's d. When the pooled
    covariance is degenerate but the mean difference lies along its
    non-degenerate axis, the distance reduces to the univariate d along
    that axis and is computed accordingly; a difference with a component
    along the degenerate axis raises DegenerateCovariance.
    """
    if a.n < 3 or b.n < 3:
        raise TooFewObservations(
            f"pairwise distance needs >= 3 observations per group, "
            f"got {a.n} and {b.n}"
        )
    cov = pooled_covariance(a, b)
    diff = a.observations.mean() - b.observations.mean()
    d = np.array([diff.real, diff.imag])
    av, bv, cv = cov[0, 0], cov[0, 1], cov[1, 1]
    lmax, lmin, vmax, vmin = _eig2x2(av, bv, cv)
    trace = av + cv
    if trace <= 0.0 or lmin <= DEGENERACY_RTOL * trace:
        norm = np.hypot(d[0], d[1])
        if norm == 0.0:
            return 0.0
        if lmax <= 0.0 or abs(float(d @ vmin)) > 1e-9 * norm:
            raise DegenerateCovariance(
                "mean difference has a component along the degenerate axis"
            )
        return abs(float(d @ vmax)) / np.sqrt(lmax)
    det = av * cv - bv * bv
    d2 = (cv * d[0] ** 2 - 2.0 * bv * d[0] * d[1] + av * d[1] ** 2) / det
    return float(np.sqrt(max(d2, 0.0)))
