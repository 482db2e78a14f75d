import random
from pathlib import Path

import pytest

from tanglebench.corpus import CommitRecord, sample_atomic_pool
from tanglebench.diffmodel import WhitespaceTokenCounter
from tanglebench.sampledata import generate_corpus_rows, write_sample_corpus
from tanglebench.tangler import construct_tangled_commit, generate_tangled
from tanglebench.taxonomy import CANONICAL_ORDER, parse_label

REPO_ROOT = Path(__file__).resolve().parents[1]
SHIPPED_CORPUS = REPO_ROOT / "data" / "sample_corpus.jsonl"


@pytest.fixture(scope="session")
def shipped_corpus_path(tmp_path_factory) -> Path:
    """The committed sample corpus; regenerated if missing (identical bytes)."""
    if SHIPPED_CORPUS.exists():
        return SHIPPED_CORPUS
    path = tmp_path_factory.mktemp("corpus") / "sample_corpus.jsonl"
    write_sample_corpus(path, per_label=470, seed=13)
    return path


@pytest.fixture(scope="session")
def small_records() -> list[CommitRecord]:
    """A small in-memory corpus: 30 eligible records per label."""
    rows = generate_corpus_rows(per_label=30, seed=99)
    records = []
    for row in rows:
        label_text = row.get("label")
        if not isinstance(label_text, str) or not row.get("message") or not row.get("diff"):
            continue
        try:
            label = parse_label(label_text)
        except ValueError:
            continue
        records.append(
            CommitRecord(
                id=row["id"],
                label=label,
                message=row["message"],
                diff_text=row["diff"],
                verified_atomic=bool(row.get("verified_atomic", False)),
            )
        )
    return records


@pytest.fixture(scope="session")
def small_pool(small_records):
    return sample_atomic_pool(
        small_records, quota_q=20, token_limit=1024, seed=7, counter=WhitespaceTokenCounter()
    )


@pytest.fixture(scope="session")
def small_dataset(small_pool):
    return generate_tangled(
        small_pool,
        counts=range(1, 6),
        per_count_quota=8,
        token_limit=8192,
        seed=3,
        counter=WhitespaceTokenCounter(),
    )


def random_tangled_commit(rng: random.Random, pool, max_n: int = 5):
    """Draw a random tangled commit from a pool for property tests."""
    n = rng.randrange(1, max_n + 1)
    labels = rng.sample(list(CANONICAL_ORDER), n)
    atomics = []
    for label in labels:
        subpool = pool.subpools[label]
        atomics.append(subpool[rng.randrange(len(subpool))])
    return construct_tangled_commit(atomics)
