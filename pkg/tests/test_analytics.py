"""Metric and statistics tests, each checked against an independent oracle:
brute-force sign-flip enumeration for Wilcoxon, direct pairwise counting for
A12, per-label enumeration for Hamming loss, and the stdlib correlation for
Pearson's r."""

import itertools
import math
import random
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tanglebench.analytics import (
    AllDifferencesZeroError,
    DegenerateVarianceError,
    a12_magnitude,
    hamming_loss,
    iqr_filter,
    pearson_r,
    quartiles,
    summarize,
    vargha_delaney_a12,
    wilcoxon_signed_rank,
)
from tanglebench.taxonomy import CANONICAL_ORDER, ConcernLabel, LabelSet


# --- independent oracles ------------------------------------------------------


def hl_oracle(pred: LabelSet, truth: LabelSet) -> float:
    wrong = 0
    for label in CANONICAL_ORDER:
        if (label in pred) != (label in truth):
            wrong += 1
    return wrong / 7


def average_ranks(values):
    """Average ranks (1-based) with ties averaged; independent of the
    implementation's scaled-rank internals."""
    indexed = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(indexed):
        j = i
        while j + 1 < len(indexed) and values[indexed[j + 1]] == values[indexed[i]]:
            j += 1
        mean_rank = (i + j + 2) / 2.0
        for k in range(i, j + 1):
            ranks[indexed[k]] = mean_rank
        i = j + 1
    return ranks


def wilcoxon_oracle(x, y) -> float:
    """Exact two-sided p by enumerating all 2^n sign assignments."""
    diffs = [a - b for a, b in zip(x, y)]
    nonzero = [d for d in diffs if d != 0]
    n = len(nonzero)
    assert n >= 1
    ranks = average_ranks([abs(d) for d in nonzero])
    total2 = round(2 * sum(ranks))
    ranks2 = [round(2 * r) for r in ranks]
    observed2 = sum(r2 for r2, d in zip(ranks2, nonzero) if d > 0)
    target = abs(2 * observed2 - total2)
    hits = 0
    for bits in range(2**n):
        w2 = 0
        for i in range(n):
            if bits >> i & 1:
                w2 += ranks2[i]
        if abs(2 * w2 - total2) >= target:
            hits += 1
    return hits / 2**n


def a12_oracle(x, y) -> float:
    greater = sum(1 for a in x for b in y if a > b)
    equal = sum(1 for a in x for b in y if a == b)
    return (2 * greater + equal) / (2 * len(x) * len(y))


def random_label_set(rng: random.Random) -> LabelSet:
    return LabelSet(frozenset(l for l in CANONICAL_ORDER if rng.random() < 0.4))


# --- Hamming loss -------------------------------------------------------------


def test_hamming_loss_identity():
    pair = LabelSet.of(ConcernLabel.FEAT, ConcernLabel.FIX)
    assert hamming_loss(pair, pair) == 0.0


def test_hamming_loss_disjoint_singletons():
    assert hamming_loss(LabelSet.of(ConcernLabel.FEAT), LabelSet.of(ConcernLabel.FIX)) == 2 / 7


@pytest.mark.parametrize("size", [1, 2, 3, 4, 5])
def test_hamming_loss_empty_prediction(size):
    truth = LabelSet(frozenset(list(CANONICAL_ORDER)[:size]))
    assert hamming_loss(LabelSet(), truth) == size / 7


def test_hamming_loss_matches_enumeration():
    rng = random.Random(4242)
    for _ in range(2000):
        pred = random_label_set(rng)
        truth = random_label_set(rng)
        assert hamming_loss(pred, truth) == hl_oracle(pred, truth)


@given(
    st.sets(st.sampled_from(list(CANONICAL_ORDER))),
    st.sets(st.sampled_from(list(CANONICAL_ORDER))),
    st.sets(st.sampled_from(list(CANONICAL_ORDER))),
)
def test_hamming_loss_is_a_metric(a, b, c):
    sa, sb, sc = LabelSet(frozenset(a)), LabelSet(frozenset(b)), LabelSet(frozenset(c))
    assert hamming_loss(sa, sb) == hamming_loss(sb, sa)
    assert hamming_loss(sa, sc) <= hamming_loss(sa, sb) + hamming_loss(sb, sc) + 1e-15
    assert (hamming_loss(sa, sb) == 0) == (sa == sb)


# --- Wilcoxon signed-rank ------------------------------------------------------


def test_wilcoxon_all_zero_differences():
    with pytest.raises(AllDifferencesZeroError):
        wilcoxon_signed_rank([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])


def test_wilcoxon_constant_shift_frozen():
    # All six differences are -1: only the two extreme assignments are as
    # extreme as observed, so p = 2/64.
    result = wilcoxon_signed_rank([1, 2, 3, 4, 5, 6], [2, 3, 4, 5, 6, 7])
    assert result.method == "exact"
    assert result.p_value == pytest.approx(0.03125, abs=1e-15)
    assert result.p_value == pytest.approx(wilcoxon_oracle([1, 2, 3, 4, 5, 6], [2, 3, 4, 5, 6, 7]))


def test_wilcoxon_matches_enumeration_random():
    rng = random.Random(90125)
    for _ in range(60):
        n = rng.randrange(2, 11)
        x = [rng.randrange(0, 8) for _ in range(n)]
        y = [rng.randrange(0, 8) for _ in range(n)]
        if all(a == b for a, b in zip(x, y)):
            x[0] += 1
        result = wilcoxon_signed_rank(x, y)
        assert result.method == "exact"
        assert abs(result.p_value - wilcoxon_oracle(x, y)) <= 1e-12


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=12))
def test_wilcoxon_matches_enumeration_property(pairs):
    x = [a for a, _ in pairs]
    y = [b for _, b in pairs]
    if all(a == b for a, b in zip(x, y)):
        with pytest.raises(AllDifferencesZeroError):
            wilcoxon_signed_rank(x, y)
        return
    result = wilcoxon_signed_rank(x, y)
    assert abs(result.p_value - wilcoxon_oracle(x, y)) <= 1e-12
    assert 0.0 < result.p_value <= 1.0


def test_wilcoxon_normal_approximation_branch():
    rng = random.Random(7)
    x = [rng.gauss(0.0, 1.0) for _ in range(60)]
    y = [v + 0.4 + rng.gauss(0.0, 0.3) for v in x]
    result = wilcoxon_signed_rank(x, y)
    assert result.method == "normal-approximation"
    assert 0.0 < result.p_value < 0.05
    assert result.n_pairs == 60


def test_wilcoxon_symmetry_of_p():
    x = [1, 5, 2, 8, 3, 9, 4]
    y = [2, 3, 4, 5, 6, 7, 8]
    assert wilcoxon_signed_rank(x, y).p_value == wilcoxon_signed_rank(y, x).p_value


# --- Vargha-Delaney A12 ---------------------------------------------------------


def test_a12_same_multiset_is_half():
    values = [3.0, 1.0, 2.0, 2.0]
    assert vargha_delaney_a12(values, values) == 0.5


def test_a12_strict_dominance():
    assert vargha_delaney_a12([10, 11, 12], [1, 2, 3]) == 1.0
    assert vargha_delaney_a12([1, 2, 3], [10, 11, 12]) == 0.0


def test_a12_frozen_example():
    # pairs: (1,2)<, (1,3)<, (2,2)=, (2,3)< -> (0 + 0.5) / 4
    assert vargha_delaney_a12([1, 2], [2, 3]) == 0.125


def test_a12_matches_enumeration_random():
    rng = random.Random(31337)
    for _ in range(300):
        m = rng.randrange(1, 12)
        n = rng.randrange(1, 12)
        x = [rng.randrange(0, 6) for _ in range(m)]
        y = [rng.randrange(0, 6) for _ in range(n)]
        assert abs(vargha_delaney_a12(x, y) - a12_oracle(x, y)) <= 1e-12


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.integers(-5, 5), min_size=1, max_size=15),
    st.lists(st.integers(-5, 5), min_size=1, max_size=15),
)
def test_a12_complement_identity(x, y):
    assert vargha_delaney_a12(x, y) + vargha_delaney_a12(y, x) == pytest.approx(1.0, abs=1e-15)


def test_a12_invariant_under_monotone_transform():
    rng = random.Random(555)
    for _ in range(100):
        x = [rng.randrange(0, 10) for _ in range(rng.randrange(1, 10))]
        y = [rng.randrange(0, 10) for _ in range(rng.randrange(1, 10))]
        # random strictly increasing map over the combined support
        support = sorted(set(x) | set(y))
        image = {}
        cursor = rng.uniform(-100, 0)
        for value in support:
            cursor += rng.uniform(0.1, 10.0)
            image[value] = cursor
        fx = [image[v] for v in x]
        fy = [image[v] for v in y]
        assert vargha_delaney_a12(fx, fy) == vargha_delaney_a12(x, y)


def test_a12_magnitude_convention():
    assert a12_magnitude(0.5) == "negligible"
    assert a12_magnitude(0.60) == "small"
    assert a12_magnitude(0.40) == "small"
    assert a12_magnitude(0.65) == "medium"
    assert a12_magnitude(0.75) == "large"
    assert a12_magnitude(0.25) == "large"


# --- Pearson r ------------------------------------------------------------------


def test_pearson_exact_linear():
    x = [1.0, 2.0, 3.0, 4.0]
    assert pearson_r(x, [2 * v + 1 for v in x]) == pytest.approx(1.0, abs=1e-15)
    assert pearson_r(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-15)


def test_pearson_fixture_matches_reference():
    x = [0.5, 1.0, 1.5, 2.0, 3.0, 4.5, 5.0, 6.5, 7.0, 8.0]
    y = [1.2, 0.9, 2.1, 2.0, 3.2, 4.0, 5.5, 6.1, 7.2, 7.9]
    assert pearson_r(x, y) == pytest.approx(statistics.correlation(x, y), abs=1e-12)
    # direct covariance / sigma computation as a second route
    mx, my = statistics.fmean(x), statistics.fmean(y)
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    reference = cov / math.sqrt(
        sum((a - mx) ** 2 for a in x) * sum((b - my) ** 2 for b in y)
    )
    assert pearson_r(x, y) == pytest.approx(reference, abs=1e-12)


def test_pearson_affine_invariance():
    rng = random.Random(99)
    x = [rng.uniform(-5, 5) for _ in range(25)]
    y = [rng.uniform(-5, 5) for _ in range(25)]
    base = pearson_r(x, y)
    assert pearson_r([3.5 * v + 2 for v in x], y) == pytest.approx(base, abs=1e-9)
    assert pearson_r(x, [0.25 * v - 7 for v in y]) == pytest.approx(base, abs=1e-9)


def test_pearson_degenerate_and_preconditions():
    with pytest.raises(DegenerateVarianceError):
        pearson_r([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        pearson_r([1.0], [2.0])
    with pytest.raises(ValueError):
        pearson_r([1.0, 2.0], [1.0])


# --- IQR filtering ---------------------------------------------------------------


def test_iqr_quartile_convention():
    # median-exclusive halves, lower-median within each half
    assert quartiles([1, 1, 1, 1, 100]) == (1, 1)
    assert quartiles([1, 2, 3, 4]) == (1, 3)
    assert quartiles([5]) == (5, 5)
    assert quartiles([2, 9]) == (2, 9)


def test_iqr_removes_planted_outlier():
    kept, removed = iqr_filter([1, 1, 1, 1, 100])
    assert kept == [1, 1, 1, 1]
    assert removed == [100]


def test_iqr_all_equal_keeps_everything():
    kept, removed = iqr_filter([7.0] * 9)
    assert kept == [7.0] * 9
    assert removed == []


def test_iqr_single_sample_kept():
    assert iqr_filter([42.0]) == ([42.0], [])


def test_iqr_fixed_point_random_lists():
    rng = random.Random(2024)
    for _ in range(500):
        n = rng.randrange(1, 50)
        values = [rng.gauss(0, 1) * (50 if rng.random() < 0.1 else 1) for _ in range(n)]
        kept, _removed = iqr_filter(values)
        kept_again, removed_again = iqr_filter(kept)
        assert kept_again == kept
        assert removed_again == []


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40))
def test_iqr_fixed_point_property(values):
    kept, removed = iqr_filter(values)
    assert sorted(kept + removed) == sorted(values)
    kept_again, removed_again = iqr_filter(kept)
    assert kept_again == kept
    assert removed_again == []


def test_summarize_basics():
    summary = summarize([4.0, 1.0, 3.0, 2.0])
    assert summary["count"] == 4
    assert summary["mean"] == 2.5
    assert summary["median"] == 2.5
    assert summary["min"] == 1.0 and summary["max"] == 4.0
    assert summarize([]) == {"count": 0}
