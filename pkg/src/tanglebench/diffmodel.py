"""Unified diff parsing and token counting.

The parser is lossless: every input line is kept verbatim (including its
original line terminator) and attributed to exactly one file header, hunk
header, or hunk body, so rendering a parsed document reproduces the input
byte for byte.

Hunk bodies are consumed by the line counts declared in the ``@@`` header,
which makes lines like ``--- deleted text`` inside a hunk unambiguous. A
hunk that ends early (fewer body lines than declared) is tolerated when the
next line starts a new file; header-preserving truncation produces exactly
that shape, and re-parsing truncated output must work.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path


class DiffParseError(ValueError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class MalformedHunkHeaderError(DiffParseError):
    pass


class BodyOutsideHunkError(DiffParseError):
    pass


_HUNK_HEADER_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")


@dataclass
class Hunk:
    """One ``@@`` hunk. Lines keep their original terminators."""

    hunk_header: str
    body_lines: list[str] = field(default_factory=list)

    def render(self) -> str:
        return self.hunk_header + "".join(self.body_lines)


@dataclass
class DiffFile:
    """One file entry: its header block and the hunks that follow."""

    header_lines: list[str] = field(default_factory=list)
    hunks: list[Hunk] = field(default_factory=list)

    def render(self) -> str:
        return "".join(self.header_lines) + "".join(h.render() for h in self.hunks)


@dataclass
class DiffDocument:
    files: list[DiffFile] = field(default_factory=list)

    def render(self) -> str:
        return "".join(f.render() for f in self.files)


def _strip_terminator(line: str) -> str:
    return line.rstrip("\r\n")


def _hunk_counts(header: str) -> tuple[int, int]:
    m = _HUNK_HEADER_RE.match(header)
    if m is None:
        raise ValueError("not a hunk header")
    old_count = int(m.group(2)) if m.group(2) is not None else 1
    new_count = int(m.group(4)) if m.group(4) is not None else 1
    return old_count, new_count


def parse_unified_diff(text: str) -> DiffDocument:
    """Parse a "diff --git"-style (or plain ``---``/``+++``) unified diff.

    Raises MalformedHunkHeaderError for a broken ``@@`` line and
    BodyOutsideHunkError for content that cannot be attributed to any file.
    """
    doc = DiffDocument()
    current: DiffFile | None = None
    pending: list[str] = []  # blank lines waiting to join the next file header
    old_left = 0
    new_left = 0
    in_header = False  # collecting header lines of `current` (no hunk seen yet)
    pending_start = 0

    for line_number, line in enumerate(text.splitlines(keepends=True), start=1):
        content = _strip_terminator(line)

        if current is not None and (old_left > 0 or new_left > 0):
            lead = content[:1]
            if lead == "\\":
                current.hunks[-1].body_lines.append(line)
                continue
            if lead == "+" and new_left > 0:
                new_left -= 1
                current.hunks[-1].body_lines.append(line)
                continue
            if lead == "-" and old_left > 0:
                old_left -= 1
                current.hunks[-1].body_lines.append(line)
                continue
            if (lead == " " or content == "") and old_left > 0 and new_left > 0:
                old_left -= 1
                new_left -= 1
                current.hunks[-1].body_lines.append(line)
                continue
            if content.startswith("diff "):
                # Hunk ended early: tolerated because header-preserving
                # truncation cuts body tails but keeps later file headers.
                old_left = 0
                new_left = 0
                # fall through: `line` starts the next file
            else:
                raise MalformedHunkHeaderError(
                    "hunk body does not match the declared line counts", line_number
                )

        if content.startswith("@@"):
            if current is None:
                raise BodyOutsideHunkError("hunk header before any file header", line_number)
            if _HUNK_HEADER_RE.match(content) is None:
                raise MalformedHunkHeaderError(f"malformed hunk header {content!r}", line_number)
            old_left, new_left = _hunk_counts(content)
            current.hunks.append(Hunk(hunk_header=line))
            in_header = False
            continue

        if content.startswith("diff ") or (
            content.startswith("--- ") and (current is None or not in_header)
        ):
            if current is not None:
                doc.files.append(current)
            current = DiffFile(header_lines=pending + [line])
            pending = []
            in_header = True
            continue

        if content.startswith("\\") and current is not None and current.hunks:
            # "\ No newline at end of file" directly after a completed hunk.
            current.hunks[-1].body_lines.append(line)
            continue

        if current is not None and in_header:
            current.header_lines.append(line)
            continue

        if content == "":
            if not pending:
                pending_start = line_number
            pending.append(line)
            continue

        raise BodyOutsideHunkError(
            f"content line {content!r} outside any file or hunk", line_number
        )

    if pending:
        raise BodyOutsideHunkError("trailing lines not attached to any file", pending_start)
    if current is not None:
        doc.files.append(current)
    return doc


class VocabFileInvalidError(ValueError):
    pass


class TokenCounter:
    """Deterministic token counting interface.

    Counts are additive across whitespace boundaries: when two texts are
    joined by whitespace (every place this project concatenates), the count
    of the joined text equals the sum of the parts.
    """

    scheme: str

    def count(self, text: str) -> int:
        raise NotImplementedError


class WhitespaceTokenCounter(TokenCounter):
    """Counts whitespace-separated words. The default for tests and fast runs."""

    scheme = "whitespace"

    def count(self, text: str) -> int:
        return len(text.split())

    def __repr__(self) -> str:
        return "WhitespaceTokenCounter()"


class BytePairTokenCounter(TokenCounter):
    """Byte-pair counting driven by a JSON vocab file of ranked merges.

    The vocab file holds ``{"merges": [["a", "b"], ["ab", "c"], ...]}`` in
    merge-priority order. Text is pre-split on whitespace; each word starts
    as single characters and the lowest-ranked adjacent pair present is
    merged repeatedly until none applies. The count is the total number of
    resulting symbols.
    """

    scheme = "byte-pair"

    def __init__(self, merges: list[tuple[str, str]], source: str = "<memory>"):
        self.merges = list(merges)
        self.source = source
        self._ranks = {pair: rank for rank, pair in enumerate(self.merges)}
        self._word_cache: dict[str, int] = {}

    @classmethod
    def from_vocab_file(cls, path: str | Path) -> "BytePairTokenCounter":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise VocabFileInvalidError(f"cannot read vocab file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise VocabFileInvalidError(f"vocab file {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict) or "merges" not in raw:
            raise VocabFileInvalidError(f"vocab file {path} must be an object with a 'merges' list")
        merges: list[tuple[str, str]] = []
        for entry in raw["merges"]:
            if (
                not isinstance(entry, (list, tuple))
                or len(entry) != 2
                or not all(isinstance(part, str) and part for part in entry)
            ):
                raise VocabFileInvalidError(
                    f"vocab file {path}: each merge must be a pair of non-empty strings"
                )
            merges.append((entry[0], entry[1]))
        return cls(merges, source=str(path))

    def _count_word(self, word: str) -> int:
        cached = self._word_cache.get(word)
        if cached is not None:
            return cached
        symbols = list(word)
        while len(symbols) > 1:
            best_rank = None
            best_index = -1
            for i in range(len(symbols) - 1):
                rank = self._ranks.get((symbols[i], symbols[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank = rank
                    best_index = i
            if best_rank is None:
                break
            merged = symbols[best_index] + symbols[best_index + 1]
            # Merge every occurrence of the winning pair in one pass.
            pair = (symbols[best_index], symbols[best_index + 1])
            out: list[str] = []
            i = 0
            while i < len(symbols):
                if i < len(symbols) - 1 and (symbols[i], symbols[i + 1]) == pair:
                    out.append(merged)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            symbols = out
        result = len(symbols)
        if len(self._word_cache) < 65536:
            self._word_cache[word] = result
        return result

    def count(self, text: str) -> int:
        return sum(self._count_word(word) for word in text.split())

    def __repr__(self) -> str:
        return f"BytePairTokenCounter(source={self.source!r}, merges={len(self.merges)})"


def count_tokens(counter: TokenCounter, text: str) -> int:
    """Count tokens of `text` under the configured scheme."""
    return counter.count(text)


def make_counter(spec: str) -> TokenCounter:
    """Build a counter from a CLI spec: ``whitespace`` or ``bpe:<vocab-path>``."""
    if spec == "whitespace":
        return WhitespaceTokenCounter()
    if spec.startswith("bpe:"):
        return BytePairTokenCounter.from_vocab_file(spec[len("bpe:"):])
    raise ValueError(f"unknown token counter spec {spec!r} (use 'whitespace' or 'bpe:<vocab>')")
