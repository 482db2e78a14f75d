"""Refined conventional-commit label set: seven concern types split into
purpose and object dimensions.

The refinement drops ``perf``, ``style`` and ``chore`` entirely; they are
rejected at parse time with a dedicated error so ingestion can count those
drops separately from plain garbage.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class ConcernLabel(enum.Enum):
    """One of the seven refined concern types."""

    FEAT = "feat"
    FIX = "fix"
    REFACTOR = "refactor"
    DOCS = "docs"
    TEST = "test"
    BUILD = "build"
    CI = "ci"

    def __str__(self) -> str:
        return self.value


class Dimension(enum.Enum):
    PURPOSE = "purpose"
    OBJECT = "object"


# Canonical ordering used for all serialization and iteration.
CANONICAL_ORDER: tuple[ConcernLabel, ...] = (
    ConcernLabel.FEAT,
    ConcernLabel.FIX,
    ConcernLabel.REFACTOR,
    ConcernLabel.DOCS,
    ConcernLabel.TEST,
    ConcernLabel.BUILD,
    ConcernLabel.CI,
)

LABEL_COUNT = len(CANONICAL_ORDER)

# Types removed by the taxonomy refinement. They are rejected, not remapped.
EXCLUDED_TYPES = frozenset({"perf", "style", "chore"})

_DIMENSIONS: dict[ConcernLabel, Dimension] = {
    ConcernLabel.FEAT: Dimension.PURPOSE,
    ConcernLabel.FIX: Dimension.PURPOSE,
    ConcernLabel.REFACTOR: Dimension.PURPOSE,
    ConcernLabel.DOCS: Dimension.OBJECT,
    ConcernLabel.TEST: Dimension.OBJECT,
    ConcernLabel.BUILD: Dimension.OBJECT,
    ConcernLabel.CI: Dimension.OBJECT,
}

_BY_VALUE = {label.value: label for label in CANONICAL_ORDER}

# "feat(parser)" style scope suffixes are stripped during corpus parsing;
# the scope itself carries no meaning here.
_SCOPE_RE = re.compile(r"^([a-z]+)\([^()]*\)$")


class LabelError(ValueError):
    """Base class for label parsing failures."""


class ExcludedTypeError(LabelError):
    """The label is one of the types removed by the taxonomy refinement."""

    def __init__(self, text: str):
        super().__init__(f"label {text!r} was removed by the taxonomy refinement")
        self.text = text


class UnknownLabelError(LabelError):
    """The label is not one of the seven concern types."""

    def __init__(self, text: str):
        super().__init__(f"unknown label {text!r}")
        self.text = text


def parse_label(text: str) -> ConcernLabel:
    """Parse a label keyword, tolerating case and surrounding whitespace.

    A trailing "(scope)" suffix is stripped. Raises ExcludedTypeError for
    perf/style/chore and UnknownLabelError for anything else.
    """
    normalized = text.strip().lower()
    scope_match = _SCOPE_RE.match(normalized)
    if scope_match:
        normalized = scope_match.group(1)
    if normalized in _BY_VALUE:
        return _BY_VALUE[normalized]
    if normalized in EXCLUDED_TYPES:
        raise ExcludedTypeError(normalized)
    raise UnknownLabelError(text)


def dimension_of(label: ConcernLabel) -> Dimension:
    """Dimension of a label: feat/fix/refactor are purpose, the rest object."""
    return _DIMENSIONS[label]


@dataclass(frozen=True)
class LabelSet:
    """An unordered set of concern labels with canonical iteration order.

    Two sets with equal membership always serialize identically, regardless
    of construction order.
    """

    members: frozenset[ConcernLabel] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not isinstance(self.members, frozenset):
            object.__setattr__(self, "members", frozenset(self.members))

    @classmethod
    def of(cls, *labels: ConcernLabel) -> "LabelSet":
        return cls(frozenset(labels))

    @classmethod
    def from_strings(cls, texts: Iterable[str]) -> "LabelSet":
        return cls(frozenset(parse_label(t) for t in texts))

    def __iter__(self) -> Iterator[ConcernLabel]:
        return iter(l for l in CANONICAL_ORDER if l in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, label: object) -> bool:
        return label in self.members

    def __bool__(self) -> bool:
        return bool(self.members)

    def to_strings(self) -> list[str]:
        """Member keywords in canonical order."""
        return [label.value for label in self]

    def union(self, other: "LabelSet") -> "LabelSet":
        return LabelSet(self.members | other.members)

    def symmetric_difference(self, other: "LabelSet") -> "LabelSet":
        return LabelSet(self.members ^ other.members)
