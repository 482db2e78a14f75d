"""Metrics and statistical procedures for experiment reports.

Implements per-commit Hamming loss over the seven-label universe, the
two-sided Wilcoxon signed-rank test (exact distribution up to n=25 effective
pairs, normal approximation with tie and continuity corrections beyond),
the Vargha-Delaney A12 effect size, Pearson's r, and IQR outlier filtering.

Quartile convention for the IQR rule: the sample is split into lower and
upper halves excluding the overall median for odd sizes; each quartile is
the lower median (an order statistic, never interpolated) of its half.
Filtering repeats until no value falls outside the fences, so the kept list
is always a fixed point of the filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .taxonomy import LABEL_COUNT, LabelSet


class AnalyticsError(ValueError):
    pass


class AllDifferencesZeroError(AnalyticsError):
    """Every paired difference is zero: the signed-rank p-value is undefined."""


class DegenerateVarianceError(AnalyticsError):
    """A correlation input is constant."""


def hamming_loss(pred: LabelSet, truth: LabelSet) -> float:
    """Fraction of the seven labels on which prediction and truth disagree."""
    return len(pred.members ^ truth.members) / LABEL_COUNT


@dataclass(frozen=True)
class ComparisonResult:
    a12: float
    p_value: float
    n_pairs: int
    method: str  # "exact" or "normal-approximation"


def _scaled_ranks(values: Sequence[float]) -> list[int]:
    """Average ranks of `values` multiplied by two, which makes them exact
    integers even when ties average to halves."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    scaled = [0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        # positions i+1 .. j+1 (1-based); doubled average = first + last
        doubled = (i + 1) + (j + 1)
        for k in range(i, j + 1):
            scaled[order[k]] = doubled
        i = j + 1
    return scaled


EXACT_THRESHOLD = 25


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float]) -> ComparisonResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are discarded; tied absolute differences receive average
    ranks. With at most EXACT_THRESHOLD effective pairs the p-value comes
    from the exact sign-assignment distribution (equivalent to enumerating
    all 2^n sign flips); above that, a normal approximation with tie and
    continuity corrections is used.
    """
    if len(x) != len(y):
        raise ValueError("paired samples must have equal length")
    if not x:
        raise ValueError("paired samples must be non-empty")
    diffs = [float(a) - float(b) for a, b in zip(x, y)]
    nonzero = [d for d in diffs if d != 0.0]
    if not nonzero:
        raise AllDifferencesZeroError("all paired differences are zero")

    n = len(nonzero)
    scaled = _scaled_ranks([abs(d) for d in nonzero])
    w_scaled = sum(s for s, d in zip(scaled, nonzero) if d > 0)
    total = sum(scaled)
    a12 = vargha_delaney_a12(x, y)

    if n <= EXACT_THRESHOLD:
        # Distribution of the (scaled) positive-rank sum over all 2^n sign
        # assignments, by subset-sum counting.
        ways = [0] * (total + 1)
        ways[0] = 1
        for s in scaled:
            for k in range(total - s, -1, -1):
                if ways[k]:
                    ways[k + s] += ways[k]
        observed = abs(2 * w_scaled - total)
        numerator = sum(c for k, c in enumerate(ways) if abs(2 * k - total) >= observed)
        p = numerator / (2**n)
        return ComparisonResult(a12=a12, p_value=p, n_pairs=len(x), method="exact")

    w_plus = w_scaled / 2.0
    mean = n * (n + 1) / 4.0
    tie_term = 0.0
    seen: dict[float, int] = {}
    for d in nonzero:
        seen[abs(d)] = seen.get(abs(d), 0) + 1
    for t in seen.values():
        tie_term += t**3 - t
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
    if variance <= 0:
        raise AllDifferencesZeroError("zero variance after tie correction")
    deviation = max(abs(w_plus - mean) - 0.5, 0.0)  # continuity correction
    z = deviation / math.sqrt(variance)
    p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    return ComparisonResult(a12=a12, p_value=p, n_pairs=len(x), method="normal-approximation")


def vargha_delaney_a12(x: Sequence[float], y: Sequence[float]) -> float:
    """Probability that a value drawn from x exceeds one drawn from y, ties
    counted half. Values below 0.5 mean x tends lower than y."""
    if not x or not y:
        raise ValueError("both samples must be non-empty")
    m, n = len(x), len(y)
    scaled = _scaled_ranks([float(v) for v in x] + [float(v) for v in y])
    r1_scaled = sum(scaled[:m])  # twice the rank sum of x
    return (r1_scaled - m * (m + 1)) / (2 * m * n)


# Conventional magnitude thresholds for |A12 - 0.5| + 0.5 (a widely used
# rule of thumb, not prescribed by the metric itself).
A12_MAGNITUDE_THRESHOLDS = (0.56, 0.64, 0.71)


def a12_magnitude(a12: float) -> str:
    dominant = max(a12, 1.0 - a12)
    small, medium, large = A12_MAGNITUDE_THRESHOLDS
    if dominant >= large:
        return "large"
    if dominant >= medium:
        return "medium"
    if dominant >= small:
        return "small"
    return "negligible"


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation, clamped to [-1, 1]."""
    if len(x) != len(y):
        raise ValueError("samples must have equal length")
    if len(x) < 2:
        raise ValueError("need at least two pairs")
    n = len(x)
    mean_x = math.fsum(x) / n
    mean_y = math.fsum(y) / n
    cov = math.fsum((a - mean_x) * (b - mean_y) for a, b in zip(x, y))
    var_x = math.fsum((a - mean_x) ** 2 for a in x)
    var_y = math.fsum((b - mean_y) ** 2 for b in y)
    if var_x == 0.0 or var_y == 0.0:
        raise DegenerateVarianceError("correlation undefined for constant input")
    return max(-1.0, min(1.0, cov / math.sqrt(var_x * var_y)))


def _lower_median(sorted_values: Sequence[float]) -> float:
    return sorted_values[(len(sorted_values) - 1) // 2]


def quartiles(values: Sequence[float]) -> tuple[float, float]:
    """(Q1, Q3) under the documented median-exclusive, lower-median convention."""
    if not values:
        raise ValueError("quartiles of an empty sample")
    ordered = sorted(values)
    n = len(ordered)
    if n == 1:
        return ordered[0], ordered[0]
    half = n // 2
    return _lower_median(ordered[:half]), _lower_median(ordered[n - half:])


def iqr_filter(samples: Sequence[float], k: float = 1.5) -> tuple[list[float], list[float]]:
    """Split samples into (kept, removed) by the k x IQR fence rule.

    The rule is re-applied until stable, so filtering the kept list again
    removes nothing. Order within each list follows the input.
    """
    if not samples:
        raise ValueError("cannot filter an empty sample")
    if k < 0:
        raise ValueError("k must be >= 0")
    kept = list(samples)
    removed: list[float] = []
    while True:
        q1, q3 = quartiles(kept)
        spread = q3 - q1
        low = q1 - k * spread
        high = q3 + k * spread
        next_kept = [s for s in kept if low <= s <= high]
        if len(next_kept) == len(kept):
            return kept, removed
        removed.extend(s for s in kept if not (low <= s <= high))
        kept = next_kept


def summarize(values: Sequence[float]) -> dict:
    """Small descriptive summary used by reports."""
    if not values:
        return {"count": 0}
    ordered = sorted(values)
    n = len(ordered)
    q1, q3 = quartiles(ordered)
    if n % 2:
        median = ordered[n // 2]
    else:
        median = (ordered[n // 2 - 1] + ordered[n // 2]) / 2.0
    return {
        "count": n,
        "mean": math.fsum(ordered) / n,
        "median": median,
        "q1": q1,
        "q3": q3,
        "min": ordered[0],
        "max": ordered[-1],
    }
