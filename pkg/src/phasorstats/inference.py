"""Hypothesis tests for bivariate complex Fourier components.

Implemented statistics:

- Hotelling's T^2 (Hotelling, 1931): multivariate T-test using the inverse
  covariance matrix; one-sample, two-sample and paired variants.
- T^2_circ (Victor & Mast, 1991): drops the covariance term under the
  assumption of uncorrelated, equal-variance components, gaining degrees of
  freedom; same variants.
- Condition-index test: compares sqrt(lambda_max / lambda_min) of a sample's
  covariance against its null distribution to decide whether the T^2_circ
  assumptions hold.
- ANOVA^2_circ: one-way extension of T^2_circ to k conditions (independent
  or repeated measures) with doubled degrees of freedom.
- One-way MANOVA via Pillai's trace, the fallback when the condition-index
  test rejects in multi-group designs.

All p-values are upper-tail; the statistics are nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .data import (
    DEGENERACY_RTOL,
    ComplexSample,
    _eig2x2,
    align_paired,
    covariance_summary,
)
from .distributions import ConditionIndexDistribution, f_cdf
from .exceptions import (
    DegenerateCovariance,
    SingularWithinScatter,
    TooFewGroups,
    TooFewObservations,
    ZeroResidualVariance,
)
from .outliers import pairwise_mahalanobis


@dataclass(frozen=True)
class TestResult:
    """Outcome of one hypothesis test.

    ``df`` and ``f_value`` are None for tests that are not F-based (the
    condition-index test). For F-based tests, p_value == 1 - f_cdf(f_value,
    *df) exactly. ``effect_size`` carries the pairwise Mahalanobis distance
    where both groups are available.
    """

    statistic_name: str
    statistic: float
    f_value: Optional[float]
    df: Optional[tuple[int, int]]
    p_value: float
    effect_size: Optional[float] = None
    n_per_group: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "statistic_name": self.statistic_name,
            "statistic": self.statistic,
            "f_value": self.f_value,
            "df": list(self.df) if self.df is not None else None,
            "p_value": self.p_value,
            "effect_size": self.effect_size,
            "n_per_group": list(self.n_per_group),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TestResult":
        return cls(
            statistic_name=d["statistic_name"],
            statistic=d["statistic"],
            f_value=d["f_value"],
            df=tuple(d["df"]) if d["df"] is not None else None,
            p_value=d["p_value"],
            effect_size=d["effect_size"],
            n_per_group=tuple(d["n_per_group"]),
        )


def _f_result(
    name: str,
    statistic: float,
    f_value: float,
    df: tuple[int, int],
    effect_size: Optional[float],
    n_per_group: tuple[int, ...],
) -> TestResult:
    p = 1.0 - f_cdf(f_value, df[0], df[1])
    return TestResult(name, float(statistic), float(f_value), df, p,
                      effect_size, n_per_group)


def _quadform_inv(cov: np.ndarray, dre: float, dim: float) -> float:
    """d' C^{-1} d through the closed-form 2x2 inverse."""
    a, b = cov[0, 0], cov[0, 1]
    c = cov[1, 1]
    det = a * c - b * b
    return (c * dre * dre - 2.0 * b * dre * dim + a * dim * dim) / det


def _check_nondegenerate(cov: np.ndarray, context: str) -> None:
    a, b, c = cov[0, 0], cov[0, 1], cov[1, 1]
    lmax, lmin, _, _ = _eig2x2(a, b, c)
    trace = a + c
    if trace <= 0.0 or lmin <= DEGENERACY_RTOL * trace:
        raise DegenerateCovariance(f"{context} covariance is degenerate")


# ---------------------------------------------------------------------------
# One-sample tests
# ---------------------------------------------------------------------------

def t2_one_sample(sample: ComplexSample, mu: complex = 0j) -> TestResult:
    """Hotelling's T^2 of one sample against the comparison point mu.

    T^2 = N (xbar - mu)' C^{-1} (xbar - mu); F = T^2 (N-2) / (2(N-1)) with
    (2, N-2) degrees of freedom.
    """
    n = sample.n
    if n < 3:
        raise TooFewObservations(f"T2 needs >= 3 observations, got {n}")
    summary = covariance_summary(sample)
    mu = complex(mu)
    diff = summary.mean_complex - mu
    if diff == 0:  # zero vector has zero length in any metric
        t2 = 0.0
    elif summary.degenerate:
        raise DegenerateCovariance("sample covariance is degenerate")
    else:
        t2 = n * _quadform_inv(summary.cov, diff.real, diff.imag)
    f = t2 * (n - 2) / (2.0 * (n - 1))
    return _f_result("T2", t2, f, (2, n - 2), None, (n,))


def t2circ_one_sample(sample: ComplexSample, mu: complex = 0j) -> TestResult:
    """T^2_circ of one sample against mu, assuming circular scatter.

    T^2_circ = (N-1) |xbar - mu|^2 / sum |x_j - xbar|^2; under the null
    F = N * T^2_circ follows F(2, 2N-2). No covariance term: the real and
    imaginary parts are assumed uncorrelated with equal variance.
    """
    n = sample.n
    if n < 2:
        raise TooFewObservations(f"T2circ needs >= 2 observations, got {n}")
    mu = complex(mu)
    z = sample.observations
    mean = z.mean()
    resid = float((np.abs(z - mean) ** 2).sum())
    num = abs(mean - mu) ** 2
    if num == 0.0:
        t2c = 0.0
    elif resid <= 0.0:
        raise ZeroResidualVariance("all observations coincide")
    else:
        t2c = (n - 1) * num / resid
    f = n * t2c
    return _f_result("T2circ", t2c, f, (2, 2 * n - 2), None, (n,))


def ci_test(sample: ComplexSample) -> TestResult:
    """Condition-index test of the T^2_circ assumptions for one sample.

    The observed sqrt(lambda_max / lambda_min) is referred to its null
    distribution for the sample size (``modified`` variant); a significant
    result means the assumptions of uncorrelated, equal-variance components
    are violated and the covariance-aware tests should be used instead.
    """
    n = sample.n
    if n < 3:
        raise TooFewObservations(f"condition-index test needs >= 3, got {n}")
    summary = covariance_summary(sample)
    if summary.degenerate:
        raise DegenerateCovariance("sample covariance is degenerate")
    dist = ConditionIndexDistribution(n=n, variant="modified")
    ci = summary.condition_index
    p = dist.sf(ci)
    return TestResult("CI_test", float(ci), None, None, p, None, (n,))


# ---------------------------------------------------------------------------
# Two-sample and paired tests
# ---------------------------------------------------------------------------

def _safe_pairwise_d(a: ComplexSample, b: ComplexSample) -> Optional[float]:
    try:
        return pairwise_mahalanobis(a, b)
    except (TooFewObservations, DegenerateCovariance):
        return None


def t2_two_sample(a: ComplexSample, b: ComplexSample) -> TestResult:
    """Two-sample Hotelling's T^2 with pooled covariance.

    df = (2, Na + Nb - 3); the pairwise Mahalanobis distance of the two
    means is attached as the effect size.
    """
    na, nb = a.n, b.n
    if na < 3 or nb < 3:
        raise TooFewObservations(
            f"two-sample T2 needs >= 3 per group, got {na} and {nb}"
        )
    sa = covariance_summary(a)
    sb = covariance_summary(b)
    pooled = ((na - 1) * sa.cov + (nb - 1) * sb.cov) / (na + nb - 2)
    diff = sa.mean_complex - sb.mean_complex
    if diff == 0:
        q = 0.0
    else:
        _check_nondegenerate(pooled, "pooled")
        q = _quadform_inv(pooled, diff.real, diff.imag)
    t2 = (na * nb / (na + nb)) * q
    f = t2 * (na + nb - 3) / (2.0 * (na + nb - 2))
    return _f_result("T2", t2, f, (2, na + nb - 3), math.sqrt(max(q, 0.0)),
                     (na, nb))


def t2circ_two_sample(a: ComplexSample, b: ComplexSample) -> TestResult:
    """Two-sample T^2_circ with pooled residual power.

    The statistic scales the squared mean difference by the pooled residual
    sum from both groups with multiplier (Na + Nb - 2); the harmonic sample
    size Na Nb / (Na + Nb) converts it to F with (2, 2(Na + Nb - 2)) degrees
    of freedom. For two equal groups it coincides with the k = 2 one-way
    ANOVA^2_circ.
    """
    na, nb = a.n, b.n
    if na < 2 or nb < 2:
        raise TooFewObservations(
            f"two-sample T2circ needs >= 2 per group, got {na} and {nb}"
        )
    za, zb = a.observations, b.observations
    ma, mb = za.mean(), zb.mean()
    resid = float((np.abs(za - ma) ** 2).sum() + (np.abs(zb - mb) ** 2).sum())
    num = abs(ma - mb) ** 2
    if num == 0.0:
        t2c = 0.0
    elif resid <= 0.0:
        raise ZeroResidualVariance("all observations coincide")
    else:
        t2c = (na + nb - 2) * num / resid
    f = (na * nb / (na + nb)) * t2c
    return _f_result("T2circ", t2c, f, (2, 2 * (na + nb - 2)),
                     _safe_pairwise_d(a, b), (na, nb))


def _paired_differences(a: ComplexSample, b: ComplexSample) -> ComplexSample:
    va, vb, labels = align_paired(a, b)
    return ComplexSample(va - vb, f"{a.condition_label}-{b.condition_label}",
                         labels)


def t2_paired(a: ComplexSample, b: ComplexSample) -> TestResult:
    """Paired T^2: one-sample T^2 of the within-unit differences vs 0."""
    res = t2_one_sample(_paired_differences(a, b), 0j)
    return TestResult(res.statistic_name, res.statistic, res.f_value, res.df,
                      res.p_value, _safe_pairwise_d(a, b), res.n_per_group)


def t2circ_paired(a: ComplexSample, b: ComplexSample) -> TestResult:
    """Paired T^2_circ: one-sample T^2_circ of the differences vs 0."""
    res = t2circ_one_sample(_paired_differences(a, b), 0j)
    return TestResult(res.statistic_name, res.statistic, res.f_value, res.df,
                      res.p_value, _safe_pairwise_d(a, b), res.n_per_group)


# ---------------------------------------------------------------------------
# k-group tests
# ---------------------------------------------------------------------------

def _f_ratio(
    ss_model: float, df_m: int, ss_resid: float, df_r: int, ss_total: float
) -> float:
    """Mean-square ratio with guards against pure rounding noise.

    A model sum of squares below 1e-24 of the total variation is exact zero
    up to float error (identical group means), giving F = 0; a residual sum
    that small with a genuine model term means a perfect fit, which is not
    testable.
    """
    floor = 1e-24 * ss_total
    if ss_total <= 0.0 or ss_model <= floor:
        return 0.0
    if ss_resid <= floor:
        raise ZeroResidualVariance("residual variation is zero")
    return (ss_model / df_m) / (ss_resid / df_r)


def _check_groups(groups: Sequence[ComplexSample], min_n: int, what: str) -> None:
    if len(groups) < 2:
        raise TooFewGroups(f"{what} needs >= 2 groups, got {len(groups)}")
    for g in groups:
        if g.n < min_n:
            raise TooFewObservations(
                f"{what} needs >= {min_n} observations per group, "
                f"got {g.n} in condition {g.condition_label!r}"
            )


def anova2circ_independent(groups: Sequence[ComplexSample]) -> TestResult:
    """One-way independent ANOVA^2_circ over k groups.

    Model mean square: sum_k N_k |xbar_k - xbar_grand|^2 over df_M = 2(k-1).
    Residual mean square: sum of squared vector distances of each point from
    its group mean over df_R = 2(sum N_k - k). F = MS_M / MS_R.
    """
    groups = list(groups)
    _check_groups(groups, 2, "ANOVA2circ")
    k = len(groups)
    all_values = np.concatenate([g.observations for g in groups])
    grand = all_values.mean()
    ss_total = float((np.abs(all_values - grand) ** 2).sum())
    ss_model = 0.0
    ss_resid = 0.0
    total_n = 0
    for g in groups:
        m = g.observations.mean()
        ss_model += g.n * abs(m - grand) ** 2
        ss_resid += float((np.abs(g.observations - m) ** 2).sum())
        total_n += g.n
    df_m = 2 * (k - 1)
    df_r = 2 * (total_n - k)
    f = _f_ratio(ss_model, df_m, ss_resid, df_r, ss_total)
    return _f_result("ANOVA2circ", f, f, (df_m, df_r), None,
                     tuple(g.n for g in groups))


def anova2circ_repeated(groups: Sequence[ComplexSample]) -> TestResult:
    """Repeated-measures ANOVA^2_circ over k within-unit conditions.

    Per-unit complex means (subject effects) are removed before computing
    residuals: the residual term is the condition-by-unit interaction.
    df = (2(k-1), 2(N-1)(k-1)). For k = 2 this reduces exactly to the
    paired T^2_circ test.
    """
    groups = list(groups)
    _check_groups(groups, 2, "ANOVA2circ")
    first = groups[0]
    matrix = np.empty((len(groups), first.n), dtype=np.complex128)
    matrix[0] = first.observations
    for i, g in enumerate(groups[1:], start=1):
        va, vb, _ = align_paired(first, g)
        matrix[i] = vb
    k, n = matrix.shape
    if n < 2:
        raise TooFewObservations("repeated-measures ANOVA2circ needs >= 2 units")
    cond_means = matrix.mean(axis=1, keepdims=True)
    unit_means = matrix.mean(axis=0, keepdims=True)
    grand = matrix.mean()
    resid = matrix - cond_means - unit_means + grand
    ss_model = float(n * (np.abs(cond_means[:, 0] - grand) ** 2).sum())
    ss_resid = float((np.abs(resid) ** 2).sum())
    ss_total = float((np.abs(matrix - grand) ** 2).sum())
    df_m = 2 * (k - 1)
    df_r = 2 * (n - 1) * (k - 1)
    f = _f_ratio(ss_model, df_m, ss_resid, df_r, ss_total)
    return _f_result("ANOVA2circ", f, f, (df_m, df_r), None,
                     tuple(g.n for g in groups))


def manova_oneway(groups: Sequence[ComplexSample]) -> TestResult:
    """One-way MANOVA on the two Fourier components, via Pillai's trace.

    Between- and within-group scatter matrices are formed on the (re, im)
    responses; Pillai's trace V = sum lambda / (1 + lambda) over the
    eigenvalues of W^{-1} B, converted to F with the standard approximation.
    For k = 2 the p-value equals the two-sample T^2 p-value.
    """
    groups = list(groups)
    _check_groups(groups, 2, "MANOVA")
    k = len(groups)
    total_n = sum(g.n for g in groups)
    if total_n <= k + 2:
        raise TooFewObservations(
            f"MANOVA needs total N > k + 2, got N={total_n}, k={k}"
        )
    all_values = np.concatenate([g.observations for g in groups])
    grand = all_values.mean()
    B = np.zeros((2, 2))
    W = np.zeros((2, 2))
    for g in groups:
        m = g.observations.mean()
        d = np.array([m.real - grand.real, m.imag - grand.imag])
        B += g.n * np.outer(d, d)
        dre = g.observations.real - m.real
        dim = g.observations.imag - m.imag
        W += np.array([[dre @ dre, dre @ dim], [dre @ dim, dim @ dim]])
    wa, wb, wc = W[0, 0], W[0, 1], W[1, 1]
    lmax_w, lmin_w, _, _ = _eig2x2(wa, wb, wc)
    if (wa + wc) <= 0.0 or lmin_w <= DEGENERACY_RTOL * (wa + wc):
        raise SingularWithinScatter("within-group scatter matrix is singular")
    det_w = wa * wc - wb * wb
    # eigenvalues of W^{-1} B from its trace and determinant (2x2)
    tr_m = (wc * B[0, 0] - 2.0 * wb * B[0, 1] + wa * B[1, 1]) / det_w
    det_m = max(B[0, 0] * B[1, 1] - B[0, 1] ** 2, 0.0) / det_w
    disc = math.sqrt(max(tr_m * tr_m - 4.0 * det_m, 0.0))
    lam = (max((tr_m + disc) / 2.0, 0.0), max((tr_m - disc) / 2.0, 0.0))
    pillai = sum(x / (1.0 + x) for x in lam)
    s = min(2, k - 1)
    df1 = s * (abs(2 - k + 1) - 1 + s + 1)  # s(2m + s + 1) with 2m integral
    df2 = s * (total_n - k - 3 + s + 1)
    if s - pillai <= 1e-12:
        f = math.inf
        p = 0.0
        return TestResult("MANOVA_pillai", float(pillai), f, (df1, df2), p,
                          None, tuple(g.n for g in groups))
    f = (pillai / (s - pillai)) * (df2 / df1)
    p = 1.0 - f_cdf(f, df1, df2)
    return TestResult("MANOVA_pillai", float(pillai), float(f), (df1, df2), p,
                      None, tuple(g.n for g in groups))
