"""Data model for complex Fourier components grouped by experimental condition.

An observation is the (real, imaginary) pair of one Fourier coefficient.
Samples store observations as a read-only complex array; all operations on
them are pure functions, so everything here is safe to share across
concurrently running simulation workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import EmptyUnit, LabelMismatch, TooFewObservations

#: Relative eigenvalue threshold below which a 2x2 covariance is treated as
#: degenerate (rank deficient): lambda_min <= DEGENERACY_RTOL * trace.
DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True)
class ComplexObservation:
    """A single bivariate observation: one complex Fourier coefficient."""

    re: float
    im: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError("observation components must be finite")

    @property
    def amplitude(self) -> float:
        return math.hypot(self.re, self.im)

    @property
    def phase(self) -> float:
        return math.atan2(self.im, self.re)

    def as_complex(self) -> complex:
        return complex(self.re, self.im)


def _coerce_observations(observations) -> np.ndarray:
    """Coerce observations to a 1-d complex128 array.

    Accepts a complex array, an (N, 2) real array of (re, im) columns, a
    sequence of ComplexObservation, or a sequence of complex numbers.
    """
    if isinstance(observations, (list, tuple)) and observations and isinstance(
        observations[0], ComplexObservation
    ):
        observations = [o.as_complex() for o in observations]
    arr = np.asarray(observations)
    if arr.ndim == 2 and arr.shape[1] == 2:
        if np.iscomplexobj(arr):
            if np.any(arr.imag != 0.0):
                raise ValueError(
                    "(N, 2) observation arrays must hold real (re, im) columns"
                )
            arr = arr.real
        arr = arr[:, 0] + 1j * arr[:, 1]
    arr = np.asarray(arr, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError("observations must be one-dimensional")
    if arr.size and not np.all(np.isfinite(arr.real) & np.isfinite(arr.imag)):
        raise ValueError("observations must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class ComplexSample:
    """Ordered observations of one condition, optionally labelled by unit.

    Parameters
    ----------
    observations :
        Complex values, or any form accepted by ``_coerce_observations``.
    condition_label :
        Name of the experimental condition.
    unit_labels :
        Optional subject / repetition identifiers, one per observation.
    """

    observations: np.ndarray
    condition_label: str = ""
    unit_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        arr = _coerce_observations(self.observations)
        arr.setflags(write=False)
        object.__setattr__(self, "observations", arr)
        if self.unit_labels is not None:
            labels = tuple(str(u) for u in self.unit_labels)
            if len(labels) != arr.size:
                raise ValueError(
                    f"{len(labels)} unit labels for {arr.size} observations"
                )
            object.__setattr__(self, "unit_labels", labels)

    @property
    def n(self) -> int:
        return int(self.observations.size)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.observations)

    def mean(self) -> complex:
        if self.n == 0:
            raise TooFewObservations("cannot average an empty sample")
        return complex(self.observations.mean())

    def subset(self, indices: Sequence[int]) -> "ComplexSample":
        idx = list(indices)
        labels = None
        if self.unit_labels is not None:
            labels = tuple(self.unit_labels[i] for i in idx)
        return ComplexSample(self.observations[idx], self.condition_label, labels)


class Design(str, Enum):
    """Supported experimental designs."""

    ONE_SAMPLE = "one_sample"
    TWO_SAMPLE_INDEPENDENT = "two_sample_independent"
    PAIRED = "paired"
    ONEWAY_INDEPENDENT = "oneway_independent"
    ONEWAY_REPEATED = "oneway_repeated"


#: Designs whose samples must share unit labels (within-unit alignment).
UNIT_ALIGNED_DESIGNS = (Design.PAIRED, Design.ONEWAY_REPEATED)


def _check_alignable(samples: Sequence[ComplexSample]) -> None:
    reference = None
    for s in samples:
        if s.unit_labels is None:
            raise LabelMismatch(
                f"condition {s.condition_label!r} has no unit labels; "
                "within-unit designs require them"
            )
        if len(set(s.unit_labels)) != len(s.unit_labels):
            raise LabelMismatch(
                f"condition {s.condition_label!r} has duplicate unit labels"
            )
        if reference is None:
            reference = set(s.unit_labels)
        elif set(s.unit_labels) != reference:
            raise LabelMismatch(
                f"condition {s.condition_label!r} does not share unit labels "
                "with the first condition"
            )


@dataclass(frozen=True, eq=False)
class GroupedDataset:
    """Samples for one analysis, with the design and comparison point."""

    samples: tuple[ComplexSample, ...]
    design: Design
    mu: complex = 0j

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "design", Design(self.design))
        object.__setattr__(self, "mu", complex(self.mu))
        k = len(self.samples)
        design = self.design
        if design is Design.ONE_SAMPLE and k != 1:
            raise ValueError(f"one_sample design needs 1 sample, got {k}")
        if design in (Design.TWO_SAMPLE_INDEPENDENT, Design.PAIRED) and k != 2:
            raise ValueError(f"{design.value} design needs 2 samples, got {k}")
        if design in (Design.ONEWAY_INDEPENDENT, Design.ONEWAY_REPEATED) and k < 2:
            raise ValueError(f"{design.value} design needs >= 2 samples, got {k}")
        if design in UNIT_ALIGNED_DESIGNS:
            _check_alignable(self.samples)

    @property
    def k(self) -> int:
        return len(self.samples)

    @property
    def condition_labels(self) -> tuple[str, ...]:
        return tuple(s.condition_label for s in self.samples)

    def aligned_matrix(self) -> tuple[np.ndarray, tuple[str, ...]]:
        """Observations as a (k, N) matrix aligned by unit label.

        Rows follow sample order; columns follow the first sample's unit
        order. Only valid for unit-aligned designs.
        """
        if self.design not in UNIT_ALIGNED_DESIGNS:
            raise LabelMismatch(
                f"{self.design.value} design has no unit alignment"
            )
        first = self.samples[0]
        labels = first.unit_labels
        out = np.empty((self.k, first.n), dtype=np.complex128)
        for i, s in enumerate(self.samples):
            order = {u: j for j, u in enumerate(s.unit_labels)}
            out[i] = s.observations[[order[u] for u in labels]]
        return out, labels


def align_paired(a: ComplexSample, b: ComplexSample) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """Return (values_a, values_b, labels) with b reordered to a's units."""
    _check_alignable([a, b])
    order = {u: j for j, u in enumerate(b.unit_labels)}
    b_aligned = b.observations[[order[u] for u in a.unit_labels]]
    return a.observations, b_aligned, a.unit_labels


def _eig2x2(a: float, b: float, c: float) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Closed-form eigendecomposition of the symmetric matrix [[a, b], [b, c]].

    Returns (lambda_max, lambda_min, v_max, v_min) with orthonormal
    eigenvectors. lambda_min is clamped at zero; sample covariances are
    positive semi-definite up to rounding.
    """
    half = 0.5 * (a + c)
    disc = math.hypot(0.5 * (a - c), b)
    lmax = half + disc
    lmin = max(half - disc, 0.0)
    if disc == 0.0:
        v1 = np.array([1.0, 0.0])
    elif a >= c:
        v1 = np.array([lmax - c, b])
    else:
        v1 = np.array([b, lmax - a])
    norm = math.hypot(v1[0], v1[1])
    if norm == 0.0:
        v1 = np.array([1.0, 0.0])
    else:
        v1 = v1 / norm
    v2 = np.array([-v1[1], v1[0]])
    return lmax, lmin, v1, v2


@dataclass(frozen=True, eq=False)
class CovarianceSummary:
    """Bivariate mean, 2x2 covariance and its eigenstructure for one sample.

    ``condition_index`` is sqrt(lambda_max / lambda_min), the aspect ratio of
    the scatter (bounding) ellipse; it equals 1 for perfectly circular
    scatter and is infinite when the covariance is degenerate.
    """

    mean: tuple[float, float]
    cov: np.ndarray
    eigenvalues: tuple[float, float]
    eigenvectors: np.ndarray
    condition_index: float
    degenerate: bool

    @property
    def mean_complex(self) -> complex:
        return complex(self.mean[0], self.mean[1])


def covariance_summary(sample: ComplexSample) -> CovarianceSummary:
    """Sample mean and covariance (N-1 denominator) with eigenstructure.

    Parameters
    ----------
    sample :
        At least two observations.

    Returns
    -------
    CovarianceSummary
        Eigenvalues sorted descending; eigenvectors are the columns of
        ``eigenvectors``, orthonormal. ``degenerate`` is set when
        lambda_min <= 1e-12 * trace; consumers that need an invertible
        covariance should raise rather than proceed.
    """
    n = sample.n
    if n < 2:
        raise TooFewObservations(f"covariance needs >= 2 observations, got {n}")
    z = sample.observations
    mean = z.mean()
    dre = z.real - mean.real
    dim = z.imag - mean.imag
    denom = n - 1
    a = float(dre @ dre) / denom
    b = float(dre @ dim) / denom
    c = float(dim @ dim) / denom
    lmax, lmin, v1, v2 = _eig2x2(a, b, c)
    trace = a + c
    degenerate = trace <= 0.0 or lmin <= DEGENERACY_RTOL * trace
    ci = math.sqrt(lmax / lmin) if lmin > 0.0 else math.inf
    cov = np.array([[a, b], [b, c]])
    cov.setflags(write=False)
    vecs = np.column_stack([v1, v2])
    vecs.setflags(write=False)
    return CovarianceSummary(
        mean=(float(mean.real), float(mean.imag)),
        cov=cov,
        eigenvalues=(lmax, lmin),
        eigenvectors=vecs,
        condition_index=ci,
        degenerate=degenerate,
    )


def coherent_mean(
    samples_per_unit: Iterable[ComplexSample],
    condition: Optional[str] = None,
) -> ComplexSample:
    """Collapse repetitions to one complex (vector) mean per unit.

    Each input sample holds one unit's repetitions; its unit label (first
    entry of ``unit_labels``, if present) identifies the unit in the output.
    Averaging is coherent: phases are preserved, so repetitions with opposed
    phases cancel instead of adding as amplitudes would.
    """
    means = []
    labels = []
    cond = condition
    for i, s in enumerate(samples_per_unit):
        if s.n == 0:
            raise EmptyUnit(f"unit at position {i} has no observations")
        means.append(s.observations.mean())
        labels.append(s.unit_labels[0] if s.unit_labels else str(i))
        if cond is None and s.condition_label:
            cond = s.condition_label
    if not means:
        raise EmptyUnit("no units supplied")
    return ComplexSample(np.asarray(means), cond or "", tuple(labels))
