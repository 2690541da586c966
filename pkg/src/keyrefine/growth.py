"""Population growth analytics over cervical morphometric features.

Records carry an age, a sex label, and one or more named feature values.
Curves are per-sex, per-feature quantile summaries over integer age
buckets; the annual growth rate is the successive difference of bucket
medians, and the growth peak is the age at which that rate is maximal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import ShapeError

SEXES = ("female", "male")

# Normative length/width medians bundled for staging and demo cohorts.
REFERENCE_GROWTH_MEDIANS: dict[tuple[str, str], dict[int, float]] = {
    ("female", "length_width_c3"): {9: 0.63, 10: 0.70, 11: 0.75},
    ("female", "length_width_c4"): {9: 0.65, 10: 0.70, 11: 0.75},
    ("male", "length_width_c3"): {12: 0.68, 13: 0.77, 14: 0.84},
    ("male", "length_width_c4"): {12: 0.67, 13: 0.74, 14: 0.81},
}

DEFAULT_QUANTILES = (0.25, 0.5, 0.75)
PEAK_AGE_RANGE = (6, 18)

# Rates closer than this count as tied.  Without a tolerance the documented
# earliest-interval tie rule could never fire: equal median increments like
# 0.65 -> 0.70 -> 0.75 differ after float subtraction (by ~1e-16).
RATE_TIE_EPSILON = 1e-9


@dataclass
class CohortRecord:
    """One subject's measurements: age in years, sex, feature values."""

    age: float
    sex: str
    values: dict[str, float] = field(default_factory=dict)
    subject_id: str | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.age) or self.age < 0:
            raise ShapeError(f"age must be finite and non-negative, got {self.age!r}")
        if self.sex not in SEXES:
            raise ShapeError(f"sex must be one of {SEXES}, got {self.sex!r}")

    @property
    def age_bucket(self) -> int:
        return int(math.floor(self.age))


@dataclass
class GrowthCurve:
    """Quantile summaries of one feature for one sex, by integer age."""

    sex: str
    feature: str
    ages: list[int]
    quantiles: dict[float, list[float]]
    counts: list[int]

    def median(self, age: int) -> float:
        return self.quantiles[0.5][self.ages.index(age)]

    def to_dict(self) -> dict:
        return {
            "sex": self.sex,
            "feature": self.feature,
            "ages": self.ages,
            "quantiles": {str(q): v for q, v in self.quantiles.items()},
            "counts": self.counts,
        }


@dataclass
class PeakResult:
    """The growth-peak age plus the medians needed for staging windows."""

    age: int
    rate: float
    interval: tuple[int, int]
    prev_median: float
    peak_median: float
    next_median: float | None

    def to_dict(self) -> dict:
        return {
            "age": self.age,
            "rate": self.rate,
            "interval": list(self.interval),
            "prev_median": self.prev_median,
            "peak_median": self.peak_median,
            "next_median": self.next_median,
        }


def standard_growth_curve(
    records: list[CohortRecord],
    feature: str,
    sex: str,
    quantiles: tuple[float, ...] = DEFAULT_QUANTILES,
) -> GrowthCurve:
    """Per-age quantiles (numpy 'linear' interpolation) of one feature."""
    if sex not in SEXES:
        raise ShapeError(f"sex must be one of {SEXES}, got {sex!r}")
    if 0.5 not in quantiles:
        raise ValueError("quantiles must include the median (0.5)")
    buckets: dict[int, list[float]] = {}
    for rec in records:
        if rec.sex != sex or feature not in rec.values:
            continue
        buckets.setdefault(rec.age_bucket, []).append(rec.values[feature])
    if not buckets:
        raise ShapeError(f"no records for sex={sex!r}, feature={feature!r}")
    ages = sorted(buckets)
    summary: dict[float, list[float]] = {q: [] for q in quantiles}
    counts = []
    for age in ages:
        values = np.asarray(buckets[age], dtype=np.float64)
        counts.append(len(values))
        for q in quantiles:
            summary[q].append(float(np.quantile(values, q, method="linear")))
    return GrowthCurve(sex=sex, feature=feature, ages=ages, quantiles=summary, counts=counts)


def annual_growth_rate(curve: GrowthCurve) -> list[tuple[tuple[int, int], float]]:
    """Median change per year between successive observed ages."""
    medians = curve.quantiles[0.5]
    rates = []
    for i in range(len(curve.ages) - 1):
        a, b = curve.ages[i], curve.ages[i + 1]
        rates.append(((a, b), (medians[i + 1] - medians[i]) / (b - a)))
    return rates


def find_growth_peak(
    curve: GrowthCurve,
    age_range: tuple[int, int] = PEAK_AGE_RANGE,
    tie_epsilon: float = RATE_TIE_EPSILON,
) -> PeakResult:
    """Right endpoint of the steepest median increase inside ``age_range``.

    Rates within ``tie_epsilon`` of the maximum count as tied and resolve
    to the earliest interval, so a plateau of equal annual gains reports
    its first year as the peak.
    """
    lo, hi = age_range
    candidates = [
        (interval, rate)
        for interval, rate in annual_growth_rate(curve)
        if lo <= interval[0] and interval[1] <= hi
    ]
    if not candidates:
        raise ShapeError(
            f"growth curve has no age interval inside [{lo}, {hi}];"
            f" observed ages: {curve.ages}"
        )
    max_rate = max(rate for _, rate in candidates)
    best_interval, best_rate = next(
        (interval, rate) for interval, rate in candidates if rate >= max_rate - tie_epsilon
    )
    peak_age = best_interval[1]
    idx = curve.ages.index(peak_age)
    medians = curve.quantiles[0.5]
    next_median = medians[idx + 1] if idx + 1 < len(curve.ages) else None
    return PeakResult(
        age=peak_age,
        rate=best_rate,
        interval=best_interval,
        prev_median=medians[curve.ages.index(best_interval[0])],
        peak_median=medians[idx],
        next_median=next_median,
    )


@dataclass
class StageWindow:
    """Feature-value window whose interior marks the peak growth stage."""

    lower: float
    upper: float

    def classify(self, value: float) -> str:
        if not math.isfinite(value):
            raise ShapeError(f"feature value must be finite, got {value!r}")
        if value < self.lower:
            return "pre_peak"
        if value <= self.upper:
            return "peak"
        return "post_peak"


def peak_stage_window(peak: PeakResult) -> StageWindow:
    """Window bounded by the midpoints between adjacent-year medians.

    The lower bound is halfway between the pre-peak and peak medians, the
    upper halfway between the peak and following-year medians.
    """
    if peak.next_median is None:
        raise ShapeError("cannot derive a stage window without a post-peak median")
    return StageWindow(
        lower=(peak.prev_median + peak.peak_median) / 2.0,
        upper=(peak.peak_median + peak.next_median) / 2.0,
    )


def growth_potential_stage(value: float, peak: PeakResult) -> str:
    """Classify a subject's feature value against the cohort peak window."""
    return peak_stage_window(peak).classify(value)


def _check_paired(x, y) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or xa.shape != ya.shape:
        raise ShapeError(f"paired samples must be equal-length 1-D, got {xa.shape} vs {ya.shape}")
    if len(xa) < 2:
        raise ShapeError("need at least 2 paired samples")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise ShapeError("paired samples must be finite")
    return xa, ya


def pearson_correlation(x, y) -> float:
    xa, ya = _check_paired(x, y)
    return float(stats.pearsonr(xa, ya).statistic)


def spearman_correlation(x, y) -> float:
    """Rank correlation with average ranks for ties."""
    xa, ya = _check_paired(x, y)
    return float(stats.spearmanr(xa, ya).statistic)


_SEX_INPUT = {"F": "female", "M": "male", "female": "female", "male": "male"}


def write_cohort(path, records: list[CohortRecord]) -> None:
    """One JSON record per line: {age, sex, values, subject_id?}."""
    import json
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for rec in records:
            row = {"age": rec.age, "sex": rec.sex, "values": rec.values}
            if rec.subject_id is not None:
                row["subject_id"] = rec.subject_id
            fh.write(json.dumps(row) + "\n")


def read_cohort(path) -> list[CohortRecord]:
    """Load cohort JSONL; sex accepts full words or the F/M codes."""
    import json
    from pathlib import Path

    path = Path(path)
    if not path.exists():
        raise ShapeError(f"cohort file not found: {path}")
    records = []
    with path.open() as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                sex = _SEX_INPUT[row["sex"]]
                records.append(
                    CohortRecord(
                        age=float(row["age"]),
                        sex=sex,
                        values={k: float(v) for k, v in row["values"].items()},
                        subject_id=row.get("subject_id"),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ShapeError(f"{path}:{line_no}: malformed cohort row: {exc}") from exc
    return records
