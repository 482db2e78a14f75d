"""Prompt assembly and model-output parsing.

The prompt is a fixed skeleton (shipped as a versioned asset) with four
placeholders: the concern-type definitions, the labeling rules, the commit
message, and the tangled code diffs. Rendering is deterministic, and the
message section stays present but empty when messages are excluded, so the
two message arms of an experiment differ only in section content.

Output parsing never throws: whatever the model produced maps to a
ParsedPrediction whose status records how the labels were obtained.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from .budget import TruncatedInput
from .fileio import sha256_text
from .taxonomy import CANONICAL_ORDER, ConcernLabel, LabelSet

STATUS_OK = "ok"
STATUS_EMPTY = "empty"
STATUS_UNPARSEABLE = "unparseable"
STATUS_UNKNOWN_DROPPED = "unknown_labels_dropped"

DEFAULT_ROLE_PREAMBLE = (
    "You are an experienced software engineer reviewing a single commit that may\n"
    "bundle several independent concerns."
)

DEFAULT_OUTPUT_FORMAT = "Labels: <comma-separated concern types>"

DEFAULT_DEFINITIONS: dict[ConcernLabel, str] = {
    ConcernLabel.FEAT: "introduces new functionality or extends application behaviour",
    ConcernLabel.FIX: "corrects faulty application behaviour (a bug)",
    ConcernLabel.REFACTOR: "restructures code without changing its external behaviour",
    ConcernLabel.DOCS: "changes documentation or comments only",
    ConcernLabel.TEST: "adds or corrects test code",
    ConcernLabel.BUILD: "changes the build system, dependencies, or packaging",
    ConcernLabel.CI: "changes continuous-integration configuration or pipelines",
}

DEFAULT_INSTRUCTIONS: tuple[str, ...] = (
    "Purpose-Purpose: if several purpose labels (feat, fix, refactor) could "
    "apply to one change, select the label that best reflects why the change "
    "was made.",
    "Object-Object: if several object labels (docs, test, build, ci) could "
    "apply to one change, select the label that reflects the functional role "
    "of the modified artefact.",
    "Purpose-Object: apply a purpose label only when the change affects "
    "application behaviour or structure; otherwise use the matching object "
    "label (for example, editing comments in code is docs, not refactor or "
    "fix).",
)

_SECTION_ORDER = ("<ccs_types>", "<labeling_instructions>", "<commit_message>", "<tangled_code_diffs>")


@dataclass(frozen=True)
class PromptTemplate:
    """Skeleton plus the content blocks substituted into it."""

    role_preamble: str = DEFAULT_ROLE_PREAMBLE
    ccs_type_definitions: dict[ConcernLabel, str] = field(
        default_factory=lambda: dict(DEFAULT_DEFINITIONS)
    )
    labeling_instructions: tuple[str, ...] = DEFAULT_INSTRUCTIONS
    output_format_instruction: str = DEFAULT_OUTPUT_FORMAT
    skeleton: str = ""

    def render_definitions(self) -> str:
        return "\n".join(
            f"- {label.value}: {self.ccs_type_definitions[label]}"
            for label in CANONICAL_ORDER
            if label in self.ccs_type_definitions
        )

    def render_instructions(self) -> str:
        return "\n".join(
            f"{i}. {rule}" for i, rule in enumerate(self.labeling_instructions, start=1)
        )

    def validate(self) -> None:
        """Check the structural contract: section order and the three rules."""
        positions = [self.skeleton.find(marker) for marker in _SECTION_ORDER]
        if any(p < 0 for p in positions) or positions != sorted(positions):
            raise ValueError(
                "template skeleton must contain the sections "
                + ", ".join(_SECTION_ORDER)
                + " in that order"
            )
        joined = " ".join(self.labeling_instructions)
        for rule in ("Purpose-Purpose", "Object-Object", "Purpose-Object"):
            if rule not in joined:
                raise ValueError(f"labeling instructions must include the {rule} rule")

    def fingerprint(self) -> str:
        """Hash of the static prompt text (everything except message/diffs)."""
        static = self.skeleton.replace("{{ccs_types}}", self.render_definitions()).replace(
            "{{instructions}}", self.render_instructions()
        )
        return sha256_text(static)


def default_template() -> PromptTemplate:
    skeleton = (
        resources.files("tanglebench")
        .joinpath("assets/classification_prompt_v1.txt")
        .read_text(encoding="utf-8")
    )
    template = PromptTemplate(skeleton=skeleton)
    template.validate()
    return template


def build_prompt(
    template: PromptTemplate, truncated: TruncatedInput, include_message: bool
) -> str:
    """Render the final prompt. Section markers are always present; only the
    message content changes between the message-on and message-off arms."""
    message = truncated.message if include_message else ""
    return (
        template.skeleton.replace("{{ccs_types}}", template.render_definitions())
        .replace("{{instructions}}", template.render_instructions())
        .replace("{{message}}", message)
        .replace("{{diffs}}", truncated.diffs_text())
    )


@dataclass(frozen=True)
class ParsedPrediction:
    labels: LabelSet
    status: str
    raw_text: str


_WORD_RE = re.compile(r"[a-zA-Z]+")
_CANONICAL_WORDS = frozenset(label.value for label in CANONICAL_ORDER)
_TOKEN_STRIP = ".,;:!?()[]{}<>\"'`*_-"


def render_answer(labels: LabelSet) -> str:
    """Canonical final answer line; the inverse of parse_prediction."""
    if not labels:
        return "Labels: none"
    return "Labels: " + ", ".join(labels.to_strings())


def _line_has_label(line: str) -> bool:
    return any(w.lower() in _CANONICAL_WORDS for w in _WORD_RE.findall(line))


def parse_prediction(raw: str) -> ParsedPrediction:
    """Extract a label set from free-form model output.

    The final answer is taken from the last line mentioning at least one
    canonical keyword; within that line, the text after the last colon is
    preferred when it contains a keyword (so "Labels: feat, fix" parses
    cleanly). Unknown word tokens are dropped and flagged via the status.
    """
    if not raw or not raw.strip():
        return ParsedPrediction(LabelSet(), STATUS_UNPARSEABLE, raw)

    selected: str | None = None
    for line in raw.splitlines():
        if _line_has_label(line):
            selected = line
    if selected is None:
        return ParsedPrediction(LabelSet(), STATUS_EMPTY, raw)

    portion = selected
    if ":" in selected:
        tail = selected.rsplit(":", 1)[1]
        if _line_has_label(tail):
            portion = tail

    found: set[ConcernLabel] = set()
    dropped = 0
    for token in re.split(r"[,\s]+", portion):
        token = token.strip(_TOKEN_STRIP).lower()
        if not token or not token.isalpha():
            continue
        if token in _CANONICAL_WORDS:
            found.add(ConcernLabel(token))
        else:
            dropped += 1
    if not found:
        return ParsedPrediction(LabelSet(), STATUS_EMPTY, raw)
    status = STATUS_UNKNOWN_DROPPED if dropped else STATUS_OK
    return ParsedPrediction(LabelSet(frozenset(found)), status, raw)
