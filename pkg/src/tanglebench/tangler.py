"""Synthesis of tangled commits from the atomic pool.

A tangled commit with concern count n merges n atomic commits with pairwise
distinct labels: messages joined by single newlines in sampled order, diffs
kept as ordered per-source segments. Generation is seeded and rejects
duplicates and over-limit candidates until each concern count reaches its
quota, so a fixed seed reproduces the dataset byte for byte.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import AtomicPool, CommitRecord, dedup_key
from .diffmodel import TokenCounter, WhitespaceTokenCounter
from .fileio import read_manifest, sha256_file, write_jsonl, write_manifest
from .taxonomy import CANONICAL_ORDER, ConcernLabel, LabelSet


class TanglerError(Exception):
    pass


class DuplicateLabelsError(TanglerError):
    pass


class QuotaUnreachableError(TanglerError):
    def __init__(self, concern_count: int, accepted: int, quota: int):
        super().__init__(
            f"concern count {concern_count}: retry budget exhausted after accepting "
            f"{accepted} of {quota} samples (token limit too tight or pool too small)"
        )
        self.concern_count = concern_count


@dataclass(frozen=True)
class DiffSegment:
    source_id: str
    diff_text: str


@dataclass(frozen=True)
class TangledCommit:
    id: str
    labels: LabelSet
    merged_message: str
    diff_segments: tuple[DiffSegment, ...]
    concern_count_n: int

    def concatenated_diffs(self) -> str:
        return concat_segments(seg.diff_text for seg in self.diff_segments)

    def combined_text(self) -> str:
        """Message plus diffs, the text whose token length is budgeted."""
        return self.merged_message + "\n" + self.concatenated_diffs()

    def source_ids(self) -> list[str]:
        return [seg.source_id for seg in self.diff_segments]

    def to_row(self) -> dict:
        return {
            "id": self.id,
            "labels": self.labels.to_strings(),
            "message": self.merged_message,
            "diff_segments": [
                {"source_id": seg.source_id, "diff": seg.diff_text}
                for seg in self.diff_segments
            ],
            "n": self.concern_count_n,
        }

    @classmethod
    def from_row(cls, row: dict) -> "TangledCommit":
        return cls(
            id=row["id"],
            labels=LabelSet.from_strings(row["labels"]),
            merged_message=row["message"],
            diff_segments=tuple(
                DiffSegment(source_id=seg["source_id"], diff_text=seg["diff"])
                for seg in row["diff_segments"]
            ),
            concern_count_n=int(row["n"]),
        )


def concat_segments(diff_texts: Iterable[str]) -> str:
    """Join diff segments back to back with one blank line between them."""
    normalized = []
    for text in diff_texts:
        normalized.append(text if text.endswith("\n") else text + "\n")
    return "\n".join(normalized)


def _tangle_id(source_ids: Sequence[str]) -> str:
    digest = hashlib.blake2b("|".join(source_ids).encode("utf-8"), digest_size=8)
    return "tangle-" + digest.hexdigest()


def construct_tangled_commit(atomics: Sequence[CommitRecord]) -> TangledCommit:
    """Merge atomic commits in the given order into one tangled commit."""
    if not 1 <= len(atomics) <= len(CANONICAL_ORDER):
        raise ValueError(f"need 1..{len(CANONICAL_ORDER)} atomic commits, got {len(atomics)}")
    labels = [record.label for record in atomics]
    if len(set(labels)) != len(labels):
        raise DuplicateLabelsError(
            "atomic commits must have pairwise distinct labels: "
            + ", ".join(l.value for l in labels)
        )
    return TangledCommit(
        id=_tangle_id([r.id for r in atomics]),
        labels=LabelSet(frozenset(labels)),
        merged_message="\n".join(record.message for record in atomics),
        diff_segments=tuple(
            DiffSegment(source_id=r.id, diff_text=r.diff_text) for r in atomics
        ),
        concern_count_n=len(atomics),
    )


@dataclass
class TangledDataset:
    samples: list[TangledCommit]
    per_count_quota: int
    counts: tuple[int, ...]
    token_limit: int

    def by_count(self, n: int) -> list[TangledCommit]:
        return [s for s in self.samples if s.concern_count_n == n]

    def validate(self, counter: TokenCounter | None = None) -> None:
        """Re-check every dataset invariant; raises AssertionError on violation."""
        counter = counter or WhitespaceTokenCounter()
        histogram: dict[int, int] = {n: 0 for n in self.counts}
        seen: set[str] = set()
        for sample in self.samples:
            n = sample.concern_count_n
            assert n in histogram, f"{sample.id}: unexpected concern count {n}"
            histogram[n] += 1
            assert len(sample.labels) == n, f"{sample.id}: |labels| != n"
            assert len(sample.diff_segments) == n, f"{sample.id}: segment count != n"
            key = dedup_key(sample.merged_message, sample.concatenated_diffs())
            assert key not in seen, f"duplicate sample content: {sample.id}"
            seen.add(key)
            assert counter.count(sample.combined_text()) <= self.token_limit, (
                f"{sample.id}: over token limit"
            )
        for n, count in histogram.items():
            assert count == self.per_count_quota, (
                f"count {n}: {count} samples, expected {self.per_count_quota}"
            )


def _select_distinct_labels(rng: random.Random, n: int) -> list[ConcernLabel]:
    # Partial Fisher-Yates: uniform over ordered selections of n labels.
    labels = list(CANONICAL_ORDER)
    for i in range(n):
        j = rng.randrange(i, len(labels))
        labels[i], labels[j] = labels[j], labels[i]
    return labels[:n]


def generate_tangled(
    pool: AtomicPool,
    counts: Iterable[int],
    per_count_quota: int,
    token_limit: int,
    seed: int = 0,
    counter: TokenCounter | None = None,
    retry_factor: int = 100,
) -> TangledDataset:
    """Generate the balanced tangled dataset from a pool (or pool subset).

    For each concern count: pick n distinct labels uniformly, draw one atomic
    commit per label (with replacement across samples), and keep the
    candidate unless it duplicates an accepted sample or exceeds the token
    limit. The retry budget (retry_factor x quota attempts per count) turns
    an infeasible configuration into a diagnostic instead of a hang.
    """
    counts = tuple(sorted(set(int(n) for n in counts)))
    if not counts:
        raise ValueError("counts must be non-empty")
    if counts[0] < 1 or counts[-1] > len(CANONICAL_ORDER):
        raise ValueError(f"concern counts must lie in 1..{len(CANONICAL_ORDER)}")
    if per_count_quota < 0:
        raise ValueError("per_count_quota must be >= 0")
    for label in CANONICAL_ORDER:
        if not pool.subpools.get(label):
            raise ValueError(f"pool has no records for label {label.value!r}")
    counter = counter or WhitespaceTokenCounter()
    rng = random.Random(seed)
    samples: list[TangledCommit] = []
    seen: set[str] = set()

    for n in counts:
        accepted = 0
        attempts = 0
        max_attempts = max(1, retry_factor * per_count_quota)
        while accepted < per_count_quota:
            if attempts >= max_attempts:
                raise QuotaUnreachableError(n, accepted, per_count_quota)
            attempts += 1
            chosen_labels = _select_distinct_labels(rng, n)
            atomics = []
            for label in chosen_labels:
                subpool = pool.subpools[label]
                atomics.append(subpool[rng.randrange(len(subpool))])
            candidate = construct_tangled_commit(atomics)
            if counter.count(candidate.combined_text()) > token_limit:
                continue
            key = dedup_key(candidate.merged_message, candidate.concatenated_diffs())
            if key in seen:
                continue
            seen.add(key)
            samples.append(candidate)
            accepted += 1
    return TangledDataset(
        samples=samples,
        per_count_quota=per_count_quota,
        counts=counts,
        token_limit=token_limit,
    )


def write_dataset(
    dataset: TangledDataset,
    path: str | Path,
    seed: int,
    counter: TokenCounter,
    pool_sha256: str | None = None,
) -> Path:
    path = Path(path)
    write_jsonl(path, (sample.to_row() for sample in dataset.samples))
    write_manifest(
        path,
        {
            "kind": "tangled-dataset",
            "counts": list(dataset.counts),
            "per_count_quota": dataset.per_count_quota,
            "token_limit": dataset.token_limit,
            "seed": seed,
            "counter": counter.scheme,
            "pool_sha256": pool_sha256,
            "content_sha256": sha256_file(path),
        },
    )
    return path


def read_dataset(path: str | Path) -> TangledDataset:
    from .fileio import read_jsonl

    path = Path(path)
    samples = [TangledCommit.from_row(row) for row in read_jsonl(path)]
    manifest = read_manifest(path)
    if manifest is not None:
        counts = tuple(int(n) for n in manifest["counts"])
        quota = int(manifest["per_count_quota"])
        token_limit = int(manifest["token_limit"])
    else:
        histogram: dict[int, int] = {}
        for sample in samples:
            histogram[sample.concern_count_n] = histogram.get(sample.concern_count_n, 0) + 1
        counts = tuple(sorted(histogram))
        quota = max(histogram.values(), default=0)
        token_limit = 2**31 - 1
    return TangledDataset(
        samples=samples, per_count_quota=quota, counts=counts, token_limit=token_limit
    )
