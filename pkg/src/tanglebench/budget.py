"""Header-preserving truncation of tangled commits under a token budget.

The budget L covers the commit message plus all diff segments. The message
(when included) and a protected prefix of every segment are always emitted
in full; the protected prefix is every file's header lines plus the first
hunk header of each file, so every touched file stays identifiable however
small the budget. The leftover budget

    L' = max(L - message_tokens - prefix_tokens, 0)

is split evenly across the n segments (floor division, remainder handed to
the earliest segments). Each segment keeps a whole-line prefix of its
remaining body lines that fits its own share; unused share is not
redistributed. Cutting never splits a line, so output stays well-formed
unified diff up to the cut point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diffmodel import TokenCounter, parse_unified_diff
from .tangler import TangledCommit, concat_segments

DEFAULT_BUDGET_GRID = (1024, 2048, 4096, 8192, 12288)


@dataclass(frozen=True)
class TokenBudget:
    """Total token allowance for one classification input."""

    limit: int

    def __post_init__(self) -> None:
        if self.limit < 1:
            raise ValueError("token budget must be positive")


@dataclass
class TruncatedInput:
    """Budget-constrained prompt payload for one tangled commit."""

    message: str
    preserved_prefixes: list[str]
    segment_bodies: list[str]
    rendered_segments: list[str]
    tokens_used: int
    truncated_flags: list[bool]
    over_budget: bool
    budget: int
    message_tokens: int
    prefix_tokens: int
    segment_budget: int
    shares: list[int] = field(default_factory=list)

    def diffs_text(self) -> str:
        return concat_segments(self.rendered_segments)

    def render_text(self) -> str:
        """Message plus truncated diffs, the text the budget bounds."""
        return self.message + "\n" + self.diffs_text()


def _segment_lines(diff_text: str) -> list[tuple[str, bool]]:
    """Lines of one segment in document order, tagged protected/body."""
    doc = parse_unified_diff(diff_text)
    entries: list[tuple[str, bool]] = []
    for diff_file in doc.files:
        for line in diff_file.header_lines:
            entries.append((line, True))
        for index, hunk in enumerate(diff_file.hunks):
            entries.append((hunk.hunk_header, index == 0))
            for line in hunk.body_lines:
                entries.append((line, False))
    return entries


def _fit_body(body_lines: list[str], share: int, counter: TokenCounter) -> int:
    """Largest prefix of body_lines whose text fits in `share` tokens."""
    kept = 0
    running = 0
    for line in body_lines:
        cost = counter.count(line)
        if running + cost > share:
            break
        running += cost
        kept += 1
    # Guard for counters that are not additive across lines: shrink until the
    # concatenated text really fits (no-op for the built-in counters).
    while kept > 0 and counter.count("".join(body_lines[:kept])) > share:
        kept -= 1
    return kept


def truncate(
    commit: TangledCommit,
    include_message: bool,
    budget: TokenBudget,
    counter: TokenCounter,
) -> TruncatedInput:
    """Apply the header-preserving truncation policy to one tangled commit."""
    if not commit.diff_segments:
        raise ValueError("commit has no diff segments")

    message = commit.merged_message if include_message else ""
    message_tokens = counter.count(message)

    segments = [_segment_lines(seg.diff_text) for seg in commit.diff_segments]
    prefix_texts = [
        "".join(line for line, protected in entries if protected) for entries in segments
    ]
    prefix_tokens = sum(counter.count(text) for text in prefix_texts)

    n = len(segments)
    remaining = max(budget.limit - message_tokens - prefix_tokens, 0)
    over_budget = message_tokens + prefix_tokens > budget.limit
    base, extra = divmod(remaining, n)
    shares = [base + (1 if i < extra else 0) for i in range(n)]

    bodies: list[str] = []
    rendered: list[str] = []
    flags: list[bool] = []
    body_tokens_total = 0
    for entries, share in zip(segments, shares):
        body_lines = [line for line, protected in entries if not protected]
        kept = _fit_body(body_lines, share, counter)
        body_text = "".join(body_lines[:kept])
        bodies.append(body_text)
        flags.append(kept < len(body_lines))
        body_tokens_total += counter.count(body_text)

        parts: list[str] = []
        body_index = 0
        for line, protected in entries:
            if protected:
                parts.append(line)
            else:
                if body_index < kept:
                    parts.append(line)
                body_index += 1
        rendered.append("".join(parts))

    return TruncatedInput(
        message=message,
        preserved_prefixes=prefix_texts,
        segment_bodies=bodies,
        rendered_segments=rendered,
        tokens_used=message_tokens + prefix_tokens + body_tokens_total,
        truncated_flags=flags,
        over_budget=over_budget,
        budget=budget.limit,
        message_tokens=message_tokens,
        prefix_tokens=prefix_tokens,
        segment_budget=remaining,
        shares=shares,
    )
