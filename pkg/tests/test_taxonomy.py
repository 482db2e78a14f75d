import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tanglebench.taxonomy import (
    CANONICAL_ORDER,
    LABEL_COUNT,
    ConcernLabel,
    Dimension,
    ExcludedTypeError,
    LabelSet,
    UnknownLabelError,
    dimension_of,
    parse_label,
)


def test_exactly_seven_labels():
    assert LABEL_COUNT == 7
    assert len({l.value for l in CANONICAL_ORDER}) == 7


@pytest.mark.parametrize("keyword", ["feat", "fix", "refactor", "docs", "test", "build", "ci"])
def test_parse_label_identity(keyword):
    assert parse_label(keyword).value == keyword


def test_parse_label_normalizes_case_and_whitespace():
    assert parse_label(" FIX ") is ConcernLabel.FIX
    assert parse_label("Feat") is ConcernLabel.FEAT
    assert parse_label("\tdocs\n") is ConcernLabel.DOCS


def test_parse_label_strips_scope():
    assert parse_label("feat(parser)") is ConcernLabel.FEAT
    assert parse_label("fix(core/db)") is ConcernLabel.FIX


@pytest.mark.parametrize("keyword", ["perf", "style", "chore"])
def test_parse_label_rejects_excluded_types(keyword):
    with pytest.raises(ExcludedTypeError):
        parse_label(keyword)


@pytest.mark.parametrize("text", ["wip", "feature", "bugfix", "feat!", "x", "release"])
def test_parse_label_rejects_unknown(text):
    with pytest.raises(UnknownLabelError):
        parse_label(text)


def test_excluded_is_distinct_from_unknown():
    assert issubclass(ExcludedTypeError, ValueError)
    assert not issubclass(ExcludedTypeError, UnknownLabelError)
    assert not issubclass(UnknownLabelError, ExcludedTypeError)


def test_round_trip_all_labels():
    for label in CANONICAL_ORDER:
        assert parse_label(label.value) is label


def test_dimension_split_is_three_four():
    purpose = [l for l in CANONICAL_ORDER if dimension_of(l) is Dimension.PURPOSE]
    objects = [l for l in CANONICAL_ORDER if dimension_of(l) is Dimension.OBJECT]
    assert len(purpose) == 3 and len(objects) == 4


def test_dimension_examples():
    assert dimension_of(ConcernLabel.FEAT) is Dimension.PURPOSE
    assert dimension_of(ConcernLabel.REFACTOR) is Dimension.PURPOSE
    assert dimension_of(ConcernLabel.DOCS) is Dimension.OBJECT
    assert dimension_of(ConcernLabel.CI) is Dimension.OBJECT


def test_label_set_canonical_iteration():
    labels = LabelSet.of(ConcernLabel.CI, ConcernLabel.FEAT, ConcernLabel.TEST)
    assert labels.to_strings() == ["feat", "test", "ci"]


@given(st.permutations(list(CANONICAL_ORDER)), st.integers(0, 7))
def test_label_set_serialization_order_independent(order, size):
    subset = order[:size]
    forward = LabelSet(frozenset(subset))
    backward = LabelSet(frozenset(reversed(subset)))
    assert forward == backward
    assert forward.to_strings() == backward.to_strings()
    assert json.dumps(forward.to_strings()) == json.dumps(backward.to_strings())


def test_label_set_operations():
    a = LabelSet.of(ConcernLabel.FEAT, ConcernLabel.FIX)
    b = LabelSet.of(ConcernLabel.FIX, ConcernLabel.DOCS)
    assert a.union(b).to_strings() == ["feat", "fix", "docs"]
    assert a.symmetric_difference(b).to_strings() == ["feat", "docs"]
    assert ConcernLabel.FEAT in a
    assert len(a) == 2
    assert not LabelSet()
    assert LabelSet.from_strings(["FIX", " feat"]) == a
