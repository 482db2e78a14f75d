"""Corpus ingestion and balanced atomic-pool sampling.

The corpus is a JSON Lines export with one labeled commit per line:
``{"id", "label", "message", "diff", "verified_atomic"}``. Ingestion drops
records that cannot enter the pool and counts every drop by reason; pool
sampling then draws a fixed per-label quota of deduplicated, length-bounded,
atomicity-checked records using a seeded Mersenne Twister so the same seed
always reproduces the same pool.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from .diffmodel import TokenCounter, WhitespaceTokenCounter
from .fileio import read_manifest, sha256_file, write_jsonl, write_manifest
from .taxonomy import (
    CANONICAL_ORDER,
    ConcernLabel,
    ExcludedTypeError,
    UnknownLabelError,
    parse_label,
)


@dataclass(frozen=True)
class CommitRecord:
    """One verified atomic unit: a single concern, message, and diff."""

    id: str
    label: ConcernLabel
    message: str
    diff_text: str
    verified_atomic: bool = False

    def to_row(self) -> dict:
        return {
            "id": self.id,
            "label": self.label.value,
            "message": self.message,
            "diff": self.diff_text,
            "verified_atomic": self.verified_atomic,
        }


def dedup_key(message: str, diff_text: str) -> str:
    """64-bit content hash identifying a commit by its message and diff."""
    digest = hashlib.blake2b(digest_size=8)
    digest.update(message.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(diff_text.encode("utf-8"))
    return digest.hexdigest()


def record_dedup_key(record: CommitRecord) -> str:
    return dedup_key(record.message, record.diff_text)


def record_token_count(record: CommitRecord, counter: TokenCounter) -> int:
    """Combined token length of the message and diff (joined on whitespace)."""
    return counter.count(record.message + "\n" + record.diff_text)


DROP_EXCLUDED_TYPE = "excluded_type"
DROP_UNKNOWN_LABEL = "unknown_label"
DROP_EMPTY_FIELD = "empty_field"
DROP_MALFORMED = "malformed"


@dataclass
class IngestionStats:
    total_lines: int = 0
    loaded: int = 0
    dropped: dict[str, int] = field(
        default_factory=lambda: {
            DROP_EXCLUDED_TYPE: 0,
            DROP_UNKNOWN_LABEL: 0,
            DROP_EMPTY_FIELD: 0,
            DROP_MALFORMED: 0,
        }
    )
    encoding_replacements: int = 0

    @property
    def total_dropped(self) -> int:
        return sum(self.dropped.values())

    def as_dict(self) -> dict:
        return {
            "total_lines": self.total_lines,
            "loaded": self.loaded,
            "dropped": dict(self.dropped),
            "encoding_replacements": self.encoding_replacements,
        }


class CorpusError(Exception):
    pass


class FileUnreadableError(CorpusError):
    pass


class SchemaViolationError(CorpusError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def _decode_line(raw: bytes, stats: IngestionStats) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        stats.encoding_replacements += 1
        return raw.decode("utf-8", errors="replace")


def load_corpus(path: str | Path) -> tuple[list[CommitRecord], IngestionStats]:
    """Load all well-formed records, counting drops by reason.

    A line that is not a JSON object at all raises SchemaViolationError; a
    JSON object with missing or mistyped fields is dropped as malformed.
    """
    path = Path(path)
    stats = IngestionStats()
    records: list[CommitRecord] = []
    try:
        raw_lines = path.read_bytes().splitlines()
    except OSError as exc:
        raise FileUnreadableError(f"cannot read corpus file {path}: {exc}") from exc

    for line_number, raw in enumerate(raw_lines, start=1):
        text = _decode_line(raw, stats).strip()
        if not text:
            continue
        stats.total_lines += 1
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaViolationError(f"invalid JSON: {exc.msg}", line_number) from exc
        if not isinstance(obj, dict):
            raise SchemaViolationError("record is not a JSON object", line_number)

        rec_id = obj.get("id")
        label_text = obj.get("label")
        message = obj.get("message")
        diff_text = obj.get("diff")
        if (
            not isinstance(rec_id, str)
            or not rec_id
            or not isinstance(label_text, str)
            or not isinstance(message, str)
            or not isinstance(diff_text, str)
        ):
            stats.dropped[DROP_MALFORMED] += 1
            continue
        if not message.strip() or not diff_text.strip():
            stats.dropped[DROP_EMPTY_FIELD] += 1
            continue
        try:
            label = parse_label(label_text)
        except ExcludedTypeError:
            stats.dropped[DROP_EXCLUDED_TYPE] += 1
            continue
        except UnknownLabelError:
            stats.dropped[DROP_UNKNOWN_LABEL] += 1
            continue
        verified = obj.get("verified_atomic", False)
        records.append(
            CommitRecord(
                id=rec_id,
                label=label,
                message=message,
                diff_text=diff_text,
                verified_atomic=bool(verified),
            )
        )
        stats.loaded += 1
    return records, stats


# --- atomicity predicates ---------------------------------------------------

AtomicityFilter = Callable[[CommitRecord], bool]


def verified_only(record: CommitRecord) -> bool:
    """Default predicate: accept only records marked verified upstream."""
    return record.verified_atomic


_CONJUNCTION_MARKERS = ("and also", "as well as", "; also", ", plus ", " additionally ")
_ALL_CCS_KEYWORDS = (
    "feat",
    "fix",
    "refactor",
    "docs",
    "test",
    "build",
    "ci",
    "perf",
    "style",
    "chore",
)
_HEADER_TYPE_RE = re.compile(
    r"\b(" + "|".join(_ALL_CCS_KEYWORDS) + r")\b(?:\([^()]*\))?!?:",
)


def heuristic_atomicity(record: CommitRecord) -> bool:
    """Best-effort check for unverified corpora: a single type keyword in the
    header and no conjunction markers in the message. Not a substitute for
    manual verification."""
    header = record.message.splitlines()[0].lower() if record.message else ""
    type_mentions = _HEADER_TYPE_RE.findall(header)
    if len(type_mentions) > 1:
        return False
    lowered = record.message.lower()
    return not any(marker in lowered for marker in _CONJUNCTION_MARKERS)


def accept_all(record: CommitRecord) -> bool:
    return True


ATOMICITY_FILTERS: dict[str, AtomicityFilter] = {
    "verified": verified_only,
    "heuristic": heuristic_atomicity,
    "all": accept_all,
}


# --- pool sampling ----------------------------------------------------------


class InsufficientCandidatesError(CorpusError):
    def __init__(self, label: ConcernLabel, needed: int, available: int):
        super().__init__(
            f"label {label.value!r}: only {available} eligible candidates for quota {needed}"
        )
        self.label = label


class QuotaNotDivisibleError(CorpusError):
    pass


@dataclass
class AtomicPool:
    """Balanced pool: exactly quota_q records per label, all under the token
    limit, no duplicate content within or across subpools."""

    subpools: dict[ConcernLabel, list[CommitRecord]]
    quota_q: int
    token_limit: int

    @property
    def size(self) -> int:
        return sum(len(v) for v in self.subpools.values())

    def records(self) -> Iterator[CommitRecord]:
        for label in CANONICAL_ORDER:
            yield from self.subpools.get(label, [])

    def validate(self, counter: TokenCounter | None = None) -> None:
        """Re-check every pool invariant; raises AssertionError on violation."""
        counter = counter or WhitespaceTokenCounter()
        seen: set[str] = set()
        for label in CANONICAL_ORDER:
            subpool = self.subpools.get(label, [])
            assert len(subpool) == self.quota_q, (
                f"{label.value}: {len(subpool)} records, expected {self.quota_q}"
            )
            for record in subpool:
                assert record.label == label
                key = record_dedup_key(record)
                assert key not in seen, f"duplicate content in pool: {record.id}"
                seen.add(key)
                assert record_token_count(record, counter) <= self.token_limit
        assert self.size == len(CANONICAL_ORDER) * self.quota_q


def _shuffled(items: list, rng: random.Random) -> list:
    # Explicit Fisher-Yates so pools depend only on MT19937 randrange output.
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.randrange(i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def sample_atomic_pool(
    records: list[CommitRecord],
    quota_q: int,
    token_limit: int,
    atomicity_filter: AtomicityFilter | None = None,
    seed: int = 0,
    counter: TokenCounter | None = None,
) -> AtomicPool:
    """Draw a balanced pool: per label, sample uniformly without replacement
    until quota_q records pass the duplicate, token-length, and atomicity
    checks. Same seed, same inputs: identical pool.
    """
    if quota_q < 0:
        raise ValueError("quota_q must be >= 0")
    counter = counter or WhitespaceTokenCounter()
    atomicity_filter = atomicity_filter or verified_only
    rng = random.Random(seed)
    ordered = sorted(records, key=lambda r: r.id)
    seen: set[str] = set()
    subpools: dict[ConcernLabel, list[CommitRecord]] = {}

    for label in CANONICAL_ORDER:
        candidates = [
            r
            for r in ordered
            if r.label == label
            and atomicity_filter(r)
            and record_token_count(r, counter) <= token_limit
        ]
        chosen: list[CommitRecord] = []
        while len(chosen) < quota_q:
            if not candidates:
                raise InsufficientCandidatesError(label, quota_q, len(chosen))
            index = rng.randrange(len(candidates))
            candidate = candidates.pop(index)
            key = record_dedup_key(candidate)
            if key in seen:
                continue
            seen.add(key)
            chosen.append(candidate)
        subpools[label] = chosen
    return AtomicPool(subpools=subpools, quota_q=quota_q, token_limit=token_limit)


@dataclass
class PoolSplit:
    train: AtomicPool
    eval: AtomicPool
    ratio: tuple[int, int] = (8, 2)


def split_pool(pool: AtomicPool, seed: int = 0) -> PoolSplit:
    """Seeded per-label shuffle followed by an exact 8:2 partition."""
    if pool.quota_q % 5 != 0:
        raise QuotaNotDivisibleError(
            f"quota {pool.quota_q} is not divisible by 5; an exact 8:2 split is impossible"
        )
    rng = random.Random(seed)
    eval_quota = pool.quota_q // 5
    train_quota = pool.quota_q - eval_quota
    train_subpools: dict[ConcernLabel, list[CommitRecord]] = {}
    eval_subpools: dict[ConcernLabel, list[CommitRecord]] = {}
    for label in CANONICAL_ORDER:
        shuffled = _shuffled(pool.subpools.get(label, []), rng)
        train_subpools[label] = shuffled[:train_quota]
        eval_subpools[label] = shuffled[train_quota:]
    return PoolSplit(
        train=AtomicPool(train_subpools, train_quota, pool.token_limit),
        eval=AtomicPool(eval_subpools, eval_quota, pool.token_limit),
    )


# --- pool files -------------------------------------------------------------


def write_pool(pool: AtomicPool, path: str | Path, seed: int, counter: TokenCounter) -> Path:
    """Write pool records as JSON Lines plus a manifest sidecar."""
    path = Path(path)
    write_jsonl(path, (r.to_row() for r in pool.records()))
    write_manifest(
        path,
        {
            "kind": "atomic-pool",
            "quota_q": pool.quota_q,
            "token_limit": pool.token_limit,
            "seed": seed,
            "counter": counter.scheme,
            "content_sha256": sha256_file(path),
        },
    )
    return path


def read_pool(path: str | Path) -> AtomicPool:
    """Read a pool file written by write_pool (manifest sidecar optional)."""
    path = Path(path)
    records, stats = load_corpus(path)
    if stats.total_dropped:
        raise SchemaViolationError(
            f"pool file contains {stats.total_dropped} invalid records", 0
        )
    subpools: dict[ConcernLabel, list[CommitRecord]] = {label: [] for label in CANONICAL_ORDER}
    for record in records:
        subpools[record.label].append(record)
    manifest = read_manifest(path)
    if manifest is not None:
        quota = int(manifest["quota_q"])
        token_limit = int(manifest["token_limit"])
    else:
        quota = max((len(v) for v in subpools.values()), default=0)
        token_limit = 2**31 - 1
    return AtomicPool(subpools=subpools, quota_q=quota, token_limit=token_limit)
