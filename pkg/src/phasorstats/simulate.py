"""Seeded Monte Carlo harness for calibration, power and outlier studies.

Samples are bivariate Gaussian: unit variance on the first axis, variance
``variance_ratio`` on the second, correlation ``correlation``, generated by
a Cholesky transform of standard normal draws. The effect size ``d`` (the
mean in population-SD units) is applied along the first axis; rotation
invariance of every statistic makes the direction irrelevant. With k > 1
groups the signal is added to the first group only.

Determinism: all draws come from numpy PCG64 generators seeded through
SeedSequence as (seed, cell_index), with replicates consumed sequentially
inside a cell, so a (spec, seed) pair defines the output exactly and cells
can be evaluated concurrently without changing results.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .data import ComplexSample
from .distributions import ConditionIndexDistribution
from .exceptions import InvalidSpec
from .inference import (
    anova2circ_independent,
    manova_oneway,
    t2_one_sample,
    t2circ_one_sample,
)

TESTS = ("T2", "T2circ", "ANOVA2circ", "MANOVA", "CI_test")


@dataclass(frozen=True)
class SimulationSpec:
    """One simulation cell: generator parameters, test, alpha and size."""

    test: str
    d: float = 0.0
    n: int = 10
    correlation: float = 0.0
    variance_ratio: float = 1.0
    k: int = 1
    planted_outlier_distance: Optional[float] = None
    alpha: float = 0.05
    n_reps: int = 10000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.test not in TESTS:
            raise InvalidSpec(f"unknown test {self.test!r}; choose from {TESTS}")
        if self.n < 2:
            raise InvalidSpec(f"n must be >= 2, got {self.n}")
        if self.n_reps < 1:
            raise InvalidSpec(f"n_reps must be >= 1, got {self.n_reps}")
        if not abs(self.correlation) < 1.0:
            raise InvalidSpec(f"|correlation| must be < 1, got {self.correlation}")
        if self.variance_ratio <= 0.0:
            raise InvalidSpec(
                f"variance_ratio must be > 0, got {self.variance_ratio}"
            )
        if not 0.0 < self.alpha < 1.0:
            raise InvalidSpec(f"alpha must be in (0, 1), got {self.alpha}")
        if self.k < 1:
            raise InvalidSpec(f"k must be >= 1, got {self.k}")
        if self.test in ("ANOVA2circ", "MANOVA") and self.k < 2:
            raise InvalidSpec(f"{self.test} needs k >= 2 groups")
        if self.d < 0.0:
            raise InvalidSpec(f"d must be >= 0, got {self.d}")
        if (
            self.planted_outlier_distance is not None
            and self.planted_outlier_distance < 0.0
        ):
            raise InvalidSpec("planted outlier distance must be >= 0")


@dataclass(frozen=True)
class RateCell:
    """Rejection proportion for one grid cell, with its binomial SE."""

    test: str
    d: float
    n: int
    correlation: float
    variance_ratio: float
    k: int
    rate: float
    se: float
    n_reps: int

    _FIELDS = ("test", "d", "n", "correlation", "variance_ratio", "k",
               "rate", "se", "n_reps")


@dataclass(frozen=True)
class RateTable:
    """Rejection rates over a grid of simulation cells."""

    cells: tuple[RateCell, ...]
    seed: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RateCell._FIELDS)
        for c in self.cells:
            writer.writerow([getattr(c, f) for f in RateCell._FIELDS])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "cells": [
                {f: getattr(c, f) for f in RateCell._FIELDS} for c in self.cells
            ],
        }
        return json.dumps(payload, indent=2) + "\n"

    def rate(self, **filters) -> float:
        """Rate of the single cell matching the given field values."""
        hits = [
            c
            for c in self.cells
            if all(getattr(c, k) == v for k, v in filters.items())
        ]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} cells match {filters}")
        return hits[0].rate


def _cholesky_rows(z: np.ndarray, r: float, v: float) -> np.ndarray:
    """Transform standard-normal pairs to covariance [[1, r sqrt(v)], [., v]]."""
    re = z[:, 0]
    im = r * math.sqrt(v) * z[:, 0] + math.sqrt(v * (1.0 - r * r)) * z[:, 1]
    return re + 1j * im


def _draw_groups(rng: np.random.Generator, spec: SimulationSpec) -> list[np.ndarray]:
    z = rng.standard_normal((spec.k * spec.n, 2))
    values = _cholesky_rows(z, spec.correlation, spec.variance_ratio)
    groups = [values[g * spec.n : (g + 1) * spec.n].copy() for g in range(spec.k)]
    groups[0] = groups[0] + spec.d
    if spec.planted_outlier_distance is not None and spec.planted_outlier_distance > 0:
        dist = spec.planted_outlier_distance
        g0 = groups[0]
        anchor = g0[1:].mean()
        angle = rng.uniform(0.0, 2.0 * math.pi)
        g0[0] = anchor + dist * complex(math.cos(angle), math.sin(angle))
    return groups


def _make_reject(spec: SimulationSpec) -> Callable[[list[np.ndarray]], bool]:
    alpha = spec.alpha
    if spec.test == "T2":
        return lambda g: t2_one_sample(ComplexSample(g[0]), 0j).p_value < alpha
    if spec.test == "T2circ":
        return lambda g: t2circ_one_sample(ComplexSample(g[0]), 0j).p_value < alpha
    if spec.test == "ANOVA2circ":
        return (
            lambda g: anova2circ_independent(
                [ComplexSample(v, str(i)) for i, v in enumerate(g)]
            ).p_value
            < alpha
        )
    if spec.test == "MANOVA":
        return (
            lambda g: manova_oneway(
                [ComplexSample(v, str(i)) for i, v in enumerate(g)]
            ).p_value
            < alpha
        )
    # CI_test: p < alpha iff the condition index exceeds the 1 - alpha
    # quantile of its null distribution (the cdf is strictly monotone),
    # so one quantile evaluation replaces a quadrature per replicate
    threshold = ConditionIndexDistribution(spec.n, "modified").quantile(1.0 - alpha)
    return lambda g: _condition_indices_of_rows(g[0][None, :])[0] > threshold


def _condition_indices_of_rows(X: np.ndarray) -> np.ndarray:
    """Condition indices of each row of an (reps, n) complex matrix."""
    mean = X.mean(axis=1, keepdims=True)
    dre = X.real - mean.real
    dim = X.imag - mean.imag
    denom = X.shape[1] - 1
    a = (dre * dre).sum(axis=1) / denom
    b = (dre * dim).sum(axis=1) / denom
    c = (dim * dim).sum(axis=1) / denom
    half = 0.5 * (a + c)
    disc = np.sqrt((0.5 * (a - c)) ** 2 + b * b)
    lmin = np.maximum(half - disc, 0.0)
    with np.errstate(divide="ignore"):
        return np.sqrt(np.where(lmin > 0.0, (half + disc) / lmin, np.inf))


def _rejection_rate(spec: SimulationSpec, cell_index: int, seed: int) -> RateCell:
    rng = np.random.default_rng([seed, cell_index])
    reject = _make_reject(spec)
    hits = 0
    for _ in range(spec.n_reps):
        if reject(_draw_groups(rng, spec)):
            hits += 1
    rate = hits / spec.n_reps
    se = math.sqrt(rate * (1.0 - rate) / spec.n_reps)
    return RateCell(
        test=spec.test,
        d=spec.d,
        n=spec.n,
        correlation=spec.correlation,
        variance_ratio=spec.variance_ratio,
        k=spec.k,
        rate=rate,
        se=se,
        n_reps=spec.n_reps,
    )


def simulate_rates(spec: SimulationSpec) -> RateTable:
    """Rejection rate of one simulation cell; a pure function of its inputs."""
    return RateTable((_rejection_rate(spec, 0, spec.seed),), spec.seed)


def simulate_grid(
    base: SimulationSpec,
    tests: Optional[Sequence[str]] = None,
    d_values: Optional[Sequence[float]] = None,
    n_values: Optional[Sequence[int]] = None,
    correlation_values: Optional[Sequence[float]] = None,
    variance_ratio_values: Optional[Sequence[float]] = None,
    outlier_values: Optional[Sequence[Optional[float]]] = None,
) -> RateTable:
    """Rejection rates over the Cartesian grid of the supplied axes.

    Axes left as None take the single value from ``base``. Cell RNG streams
    derive from (base.seed, cell index) in grid enumeration order.
    """
    tests = list(tests) if tests is not None else [base.test]
    d_values = list(d_values) if d_values is not None else [base.d]
    n_values = list(n_values) if n_values is not None else [base.n]
    correlation_values = (
        list(correlation_values)
        if correlation_values is not None
        else [base.correlation]
    )
    variance_ratio_values = (
        list(variance_ratio_values)
        if variance_ratio_values is not None
        else [base.variance_ratio]
    )
    outlier_values = (
        list(outlier_values)
        if outlier_values is not None
        else [base.planted_outlier_distance]
    )
    cells = []
    index = 0
    for test in tests:
        for d in d_values:
            for n in n_values:
                for r in correlation_values:
                    for v in variance_ratio_values:
                        for dist in outlier_values:
                            spec = replace(
                                base,
                                test=test,
                                d=d,
                                n=n,
                                correlation=r,
                                variance_ratio=v,
                                planted_outlier_distance=dist,
                            )
                            cells.append(_rejection_rate(spec, index, base.seed))
                            index += 1
    return RateTable(tuple(cells), base.seed)


def simulate_ci_distribution(n: int, n_reps: int, seed: int) -> np.ndarray:
    """Condition indices of n_reps null spherical samples of size n.

    Vectorized over replicates; test_simulate.py pins the vectorized values
    to covariance_summary on a sample of replicates.
    """
    if n < 3:
        raise InvalidSpec(f"condition index needs n >= 3, got {n}")
    if n_reps < 1:
        raise InvalidSpec(f"n_reps must be >= 1, got {n_reps}")
    rng = np.random.default_rng([seed, 0])
    z = rng.standard_normal((n_reps, n, 2))
    X = z[:, :, 0] + 1j * z[:, :, 1]
    return _condition_indices_of_rows(X)


def simulate_amplitude_skew(
    d: float, n_reps: int, seed: int
) -> tuple[np.ndarray, float]:
    """Amplitudes of unit-variance isotropic draws centered at (d, 0).

    Returns the amplitude sample and its skewness (m3 / m2^1.5). At d = 0
    the amplitudes are Rayleigh with skewness 2 sqrt(pi) (pi - 3) /
    (4 - pi)^1.5; skew decays toward 0 as d grows.
    """
    if d < 0.0:
        raise InvalidSpec(f"d must be >= 0, got {d}")
    if n_reps < 2:
        raise InvalidSpec(f"n_reps must be >= 2, got {n_reps}")
    rng = np.random.default_rng([seed, 0])
    z = rng.standard_normal((n_reps, 2))
    amps = np.abs((z[:, 0] + d) + 1j * z[:, 1])
    centered = amps - amps.mean()
    m2 = float((centered**2).mean())
    m3 = float((centered**3).mean())
    return amps, m3 / m2**1.5


def simulate_outlier_effect(
    n: int, outlier_distance: float, n_reps: int, seed: int, alpha: float = 0.05
) -> float:
    """Condition-index-test rejection rate with one planted outlier.

    Null spherical samples of size n in which one point is displaced to the
    requested distance (in population SD units) from the mean of the
    remaining points; at distance 0 the sample is left untouched.
    """
    if n < 4:
        raise InvalidSpec(f"outlier simulation needs n >= 4, got {n}")
    spec = SimulationSpec(
        test="CI_test",
        n=n,
        planted_outlier_distance=outlier_distance,
        alpha=alpha,
        n_reps=n_reps,
        seed=seed,
    )
    return simulate_rates(spec).cells[0].rate
