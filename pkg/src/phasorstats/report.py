"""Full-analysis reports driven by the test-selection flowchart.

The decision structure: screen outliers, then test every condition's
scatter with the condition-index test. If no condition rejects, the
circular-variant statistics (T^2_circ / ANOVA^2_circ) are used; otherwise
the covariance-aware ones (T^2 / MANOVA). Significant multi-group results
are followed by pairwise post-hoc tests at a Bonferroni-adjusted level,
with pairwise Mahalanobis distances as effect sizes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from . import __version__
from .amplitude import AmplitudeSummary, amp_ci_bootstrap, amp_errors_ellipse
from .data import ComplexSample, Design, GroupedDataset, covariance_summary
from .exceptions import DegenerateCovariance, TooFewObservations
from .inference import (
    TestResult,
    anova2circ_independent,
    anova2circ_repeated,
    ci_test,
    manova_oneway,
    t2_one_sample,
    t2_paired,
    t2_two_sample,
    t2circ_one_sample,
    t2circ_paired,
    t2circ_two_sample,
)
from .outliers import DEFAULT_THRESHOLD, ScreeningReport, exclude_outliers


@dataclass(frozen=True)
class ConditionSummary:
    """Scatter summary and assumption test for one condition."""

    condition: str
    n: int
    mean_re: float
    mean_im: float
    amplitude: float
    phase: float
    covariance: tuple[tuple[float, float], tuple[float, float]]
    eigenvalues: tuple[float, float]
    condition_index: Optional[float]
    degenerate: bool
    ci_p_value: Optional[float]

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "n": self.n,
            "mean_re": self.mean_re,
            "mean_im": self.mean_im,
            "amplitude": self.amplitude,
            "phase": self.phase,
            "covariance": [list(row) for row in self.covariance],
            "eigenvalues": list(self.eigenvalues),
            "condition_index": self.condition_index,
            "degenerate": self.degenerate,
            "ci_p_value": self.ci_p_value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConditionSummary":
        return cls(
            condition=d["condition"],
            n=d["n"],
            mean_re=d["mean_re"],
            mean_im=d["mean_im"],
            amplitude=d["amplitude"],
            phase=d["phase"],
            covariance=tuple(tuple(row) for row in d["covariance"]),
            eigenvalues=tuple(d["eigenvalues"]),
            condition_index=d["condition_index"],
            degenerate=d["degenerate"],
            ci_p_value=d["ci_p_value"],
        )


@dataclass(frozen=True)
class ConditionScreening:
    condition: str
    n_before: int
    flagged_indices: tuple[int, ...]
    flagged_units: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "n_before": self.n_before,
            "flagged_indices": list(self.flagged_indices),
            "flagged_units": list(self.flagged_units),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConditionScreening":
        return cls(
            condition=d["condition"],
            n_before=d["n_before"],
            flagged_indices=tuple(d["flagged_indices"]),
            flagged_units=tuple(d["flagged_units"]),
        )


@dataclass(frozen=True)
class ScreeningSummary:
    threshold: float
    excluded_units: tuple[str, ...]
    per_condition: tuple[ConditionScreening, ...]

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "excluded_units": list(self.excluded_units),
            "per_condition": [c.to_dict() for c in self.per_condition],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScreeningSummary":
        return cls(
            threshold=d["threshold"],
            excluded_units=tuple(d["excluded_units"]),
            per_condition=tuple(
                ConditionScreening.from_dict(c) for c in d["per_condition"]
            ),
        )


@dataclass(frozen=True)
class PosthocResult:
    pair: tuple[str, str]
    result: TestResult
    alpha_adjusted: float
    significant: bool

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "result": self.result.to_dict(),
            "alpha_adjusted": self.alpha_adjusted,
            "significant": self.significant,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PosthocResult":
        return cls(
            pair=tuple(d["pair"]),
            result=TestResult.from_dict(d["result"]),
            alpha_adjusted=d["alpha_adjusted"],
            significant=d["significant"],
        )


@dataclass(frozen=True)
class AmplitudeEntry:
    condition: str
    ellipse: AmplitudeSummary
    bootstrap: AmplitudeSummary

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "ellipse": self.ellipse.to_dict(),
            "bootstrap": self.bootstrap.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AmplitudeEntry":
        return cls(
            condition=d["condition"],
            ellipse=AmplitudeSummary.from_dict(d["ellipse"]),
            bootstrap=AmplitudeSummary.from_dict(d["bootstrap"]),
        )


@dataclass(frozen=True)
class Provenance:
    input_sha256: str
    seed: int
    version: str

    def to_dict(self) -> dict:
        return {
            "input_sha256": self.input_sha256,
            "seed": self.seed,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Provenance":
        return cls(**d)


@dataclass(frozen=True)
class AnalysisReport:
    """Everything one analysis produced, reproducible from its provenance."""

    design: str
    alpha: float
    mu: tuple[float, float]
    branch: str
    flowchart_leaf: str
    rationale: str
    conditions: tuple[ConditionSummary, ...]
    screening: Optional[ScreeningSummary]
    primary: TestResult
    posthoc: tuple[PosthocResult, ...]
    n_comparisons: int
    amplitudes: tuple[AmplitudeEntry, ...]
    provenance: Provenance

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "alpha": self.alpha,
            "mu": list(self.mu),
            "branch": self.branch,
            "flowchart_leaf": self.flowchart_leaf,
            "rationale": self.rationale,
            "conditions": [c.to_dict() for c in self.conditions],
            "screening": self.screening.to_dict() if self.screening else None,
            "primary": self.primary.to_dict(),
            "posthoc": [p.to_dict() for p in self.posthoc],
            "n_comparisons": self.n_comparisons,
            "amplitudes": [a.to_dict() for a in self.amplitudes],
            "provenance": self.provenance.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        return cls(
            design=d["design"],
            alpha=d["alpha"],
            mu=tuple(d["mu"]),
            branch=d["branch"],
            flowchart_leaf=d["flowchart_leaf"],
            rationale=d["rationale"],
            conditions=tuple(
                ConditionSummary.from_dict(c) for c in d["conditions"]
            ),
            screening=(
                ScreeningSummary.from_dict(d["screening"])
                if d["screening"]
                else None
            ),
            primary=TestResult.from_dict(d["primary"]),
            posthoc=tuple(PosthocResult.from_dict(p) for p in d["posthoc"]),
            n_comparisons=d["n_comparisons"],
            amplitudes=tuple(
                AmplitudeEntry.from_dict(a) for a in d["amplitudes"]
            ),
            provenance=Provenance.from_dict(d["provenance"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def _summarize_condition(sample: ComplexSample) -> ConditionSummary:
    summary = covariance_summary(sample)
    try:
        ci_p = ci_test(sample).p_value
    except (TooFewObservations, DegenerateCovariance):
        ci_p = None
    amp = abs(summary.mean_complex)
    return ConditionSummary(
        condition=sample.condition_label,
        n=sample.n,
        mean_re=summary.mean[0],
        mean_im=summary.mean[1],
        amplitude=amp,
        phase=math.atan2(summary.mean[1], summary.mean[0]),
        covariance=tuple(tuple(float(x) for x in row) for row in summary.cov),
        eigenvalues=(float(summary.eigenvalues[0]), float(summary.eigenvalues[1])),
        condition_index=(
            None if summary.degenerate else float(summary.condition_index)
        ),
        degenerate=summary.degenerate,
        ci_p_value=ci_p,
    )


def _screening_summary(
    dataset: GroupedDataset, report: ScreeningReport
) -> ScreeningSummary:
    per_condition = []
    for sample, rep in zip(dataset.samples, report.per_condition):
        units = tuple(
            sample.unit_labels[i] for i in rep.flagged
        ) if sample.unit_labels else ()
        per_condition.append(
            ConditionScreening(
                condition=sample.condition_label,
                n_before=sample.n,
                flagged_indices=rep.flagged,
                flagged_units=units,
            )
        )
    return ScreeningSummary(
        threshold=report.threshold,
        excluded_units=report.excluded_units,
        per_condition=tuple(per_condition),
    )


def _decide_branch(
    conditions: Sequence[ConditionSummary], alpha: float
) -> tuple[str, str]:
    """Branch plus rationale, a pure function of the CI p-values."""
    violated = [c.condition for c in conditions if c.degenerate]
    p_values = [c.ci_p_value for c in conditions if c.ci_p_value is not None]
    violated += [
        c.condition
        for c in conditions
        if c.ci_p_value is not None and c.ci_p_value < alpha
    ]
    untestable = [
        c.condition
        for c in conditions
        if c.ci_p_value is None and not c.degenerate
    ]
    if violated:
        rationale = (
            f"condition-index test rejects for condition(s) "
            f"{', '.join(sorted(set(violated)))} at alpha = {alpha:g}; "
            "covariance-aware branch"
        )
        return "classic", rationale
    detail = (
        f"min p = {min(p_values):.4g} >= alpha = {alpha:g}"
        if p_values
        else "no condition large enough to test"
    )
    rationale = (
        f"condition-index test non-significant for all conditions ({detail}); "
        "circular-variant branch"
    )
    if untestable and p_values:
        rationale += (
            f"; condition(s) {', '.join(untestable)} too small to test"
        )
    return "circ", rationale


_LEAVES = {
    (Design.ONE_SAMPLE, "circ"): "one_sample_t2circ",
    (Design.ONE_SAMPLE, "classic"): "one_sample_t2",
    (Design.TWO_SAMPLE_INDEPENDENT, "circ"): "two_sample_t2circ",
    (Design.TWO_SAMPLE_INDEPENDENT, "classic"): "two_sample_t2",
    (Design.PAIRED, "circ"): "paired_t2circ",
    (Design.PAIRED, "classic"): "paired_t2",
    (Design.ONEWAY_INDEPENDENT, "circ"): "anova2circ_independent",
    (Design.ONEWAY_INDEPENDENT, "classic"): "manova",
    (Design.ONEWAY_REPEATED, "circ"): "anova2circ_repeated",
    (Design.ONEWAY_REPEATED, "classic"): "manova",
}


def _primary_test(dataset: GroupedDataset, branch: str) -> TestResult:
    circ = branch == "circ"
    s = dataset.samples
    if dataset.design is Design.ONE_SAMPLE:
        fn = t2circ_one_sample if circ else t2_one_sample
        return fn(s[0], dataset.mu)
    if dataset.design is Design.TWO_SAMPLE_INDEPENDENT:
        fn = t2circ_two_sample if circ else t2_two_sample
        return fn(s[0], s[1])
    if dataset.design is Design.PAIRED:
        fn = t2circ_paired if circ else t2_paired
        return fn(s[0], s[1])
    if dataset.design is Design.ONEWAY_INDEPENDENT:
        return anova2circ_independent(s) if circ else manova_oneway(s)
    if circ:
        return anova2circ_repeated(s)
    # no repeated-measures MANOVA variant here; the one-way Pillai test is
    # the documented fallback when assumptions are violated
    return manova_oneway(s)


def _posthoc_tests(
    dataset: GroupedDataset,
    branch: str,
    alpha: float,
    baseline: Optional[str],
) -> tuple[tuple[PosthocResult, ...], int]:
    labels = dataset.condition_labels
    if baseline is not None:
        if baseline not in labels:
            raise ValueError(f"baseline {baseline!r} is not a condition")
        pairs = [
            (baseline, other) for other in labels if other != baseline
        ]
    else:
        pairs = [
            (labels[i], labels[j])
            for i in range(len(labels))
            for j in range(i + 1, len(labels))
        ]
    m = len(pairs)
    adjusted = alpha / m
    circ = branch == "circ"
    if dataset.design is Design.ONEWAY_REPEATED:
        fn = t2circ_paired if circ else t2_paired
    else:
        fn = t2circ_two_sample if circ else t2_two_sample
    by_label = {s.condition_label: s for s in dataset.samples}
    results = []
    for a, b in pairs:
        res = fn(by_label[a], by_label[b])
        results.append(
            PosthocResult(
                pair=(a, b),
                result=res,
                alpha_adjusted=adjusted,
                significant=res.p_value < adjusted,
            )
        )
    return tuple(results), m


def run_flowchart(
    dataset: GroupedDataset,
    alpha: float = 0.05,
    seed: int = 0,
    baseline: Optional[str] = None,
    screen_outliers: bool = True,
    outlier_threshold: float = DEFAULT_THRESHOLD,
    input_sha256: str = "",
    bootstrap_reps: int = 10000,
) -> AnalysisReport:
    """Run the full decision flowchart on a dataset and assemble the report.

    Outliers are screened first (disable with ``screen_outliers=False``),
    the condition-index test picks the branch, the design picks the test,
    and significant multi-group results get Bonferroni-corrected pairwise
    post-hoc comparisons (restricted to ``baseline`` vs the rest when a
    baseline condition is given).
    """
    screening = None
    if screen_outliers:
        screened, screen_report = exclude_outliers(dataset, outlier_threshold)
        screening = _screening_summary(dataset, screen_report)
        dataset = screened
    conditions = tuple(_summarize_condition(s) for s in dataset.samples)
    branch, rationale = _decide_branch(conditions, alpha)
    leaf = _LEAVES[(dataset.design, branch)]
    primary = _primary_test(dataset, branch)
    posthoc: tuple[PosthocResult, ...] = ()
    m = 0
    if (
        dataset.design in (Design.ONEWAY_INDEPENDENT, Design.ONEWAY_REPEATED)
        and primary.p_value < alpha
    ):
        posthoc, m = _posthoc_tests(dataset, branch, alpha, baseline)
    amplitudes = []
    for i, s in enumerate(dataset.samples):
        try:
            ellipse = amp_errors_ellipse(s, level=0.68)
        except (TooFewObservations, DegenerateCovariance):
            ellipse = None
        boot = amp_ci_bootstrap(s, level=0.68, n_boot=bootstrap_reps,
                                seed=[seed, i])
        if ellipse is not None:
            amplitudes.append(
                AmplitudeEntry(s.condition_label, ellipse, boot)
            )
    return AnalysisReport(
        design=dataset.design.value,
        alpha=alpha,
        mu=(dataset.mu.real, dataset.mu.imag),
        branch=branch,
        flowchart_leaf=leaf,
        rationale=rationale,
        conditions=conditions,
        screening=screening,
        primary=primary,
        posthoc=posthoc,
        n_comparisons=m,
        amplitudes=tuple(amplitudes),
        provenance=Provenance(input_sha256, seed, __version__),
    )


def format_text(report: AnalysisReport) -> str:
    """Human-readable rendering of a report."""
    lines = []
    lines.append(f"design: {report.design}   alpha: {report.alpha:g}")
    lines.append(
        f"provenance: sha256={report.provenance.input_sha256 or '-'} "
        f"seed={report.provenance.seed} version={report.provenance.version}"
    )
    if report.screening is not None:
        excluded = (
            ", ".join(report.screening.excluded_units)
            if report.screening.excluded_units
            else "none"
        )
        flagged = sum(
            len(c.flagged_indices) for c in report.screening.per_condition
        )
        lines.append(
            f"outlier screening: threshold D > "
            f"{report.screening.threshold:g}; {flagged} flagged; "
            f"excluded units: {excluded}"
        )
    lines.append("conditions:")
    for c in report.conditions:
        ci = f"{c.condition_index:.3f}" if c.condition_index is not None else "inf"
        p = f"{c.ci_p_value:.3f}" if c.ci_p_value is not None else "n/a"
        lines.append(
            f"  {c.condition}: N={c.n} mean=({c.mean_re:.4g}, {c.mean_im:.4g}) "
            f"amplitude={c.amplitude:.4g} CI={ci} p={p}"
        )
    lines.append(f"decision: {report.rationale}")
    lines.append(f"selected test: {report.flowchart_leaf}")
    r = report.primary
    stat = f"{r.statistic_name} = {r.statistic:.4g}"
    if r.f_value is not None and r.df is not None:
        stat += f", F({r.df[0]}, {r.df[1]}) = {r.f_value:.4g}"
    stat += f", p = {r.p_value:.4g}"
    if r.effect_size is not None:
        stat += f", D = {r.effect_size:.4g}"
    lines.append(f"result: {stat}")
    if report.posthoc:
        lines.append(
            f"post-hoc pairwise tests (Bonferroni: m = {report.n_comparisons}, "
            f"alpha = {report.posthoc[0].alpha_adjusted:.4g}):"
        )
        for ph in report.posthoc:
            res = ph.result
            marker = "*" if ph.significant else " "
            entry = (
                f"  {marker} {ph.pair[0]} vs {ph.pair[1]}: "
                f"{res.statistic_name} = {res.statistic:.4g}"
            )
            if res.f_value is not None and res.df is not None:
                entry += f", F({res.df[0]}, {res.df[1]}) = {res.f_value:.4g}"
            entry += f", p = {res.p_value:.4g}"
            if res.effect_size is not None:
                entry += f", D = {res.effect_size:.4g}"
            lines.append(entry)
    if report.amplitudes:
        lines.append("amplitude summaries (level 0.68):")
        for a in report.amplitudes:
            lines.append(
                f"  {a.condition}: |mean| = {a.ellipse.mean_amplitude:.4g}, "
                f"ellipse [{a.ellipse.error_low:.4g}, "
                f"{a.ellipse.error_high:.4g}], "
                f"bootstrap [{a.bootstrap.error_low:.4g}, "
                f"{a.bootstrap.error_high:.4g}]"
            )
    return "\n".join(lines) + "\n"
