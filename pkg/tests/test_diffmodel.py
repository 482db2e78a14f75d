"""Diff parser and token counter tests.

The lossless contract is exercised against a corpus of real diffs produced
by actual git on a scripted repository (file creation, deletion, renames,
mode changes, unicode content, missing trailing newlines), plus targeted
unit cases for every error path. The byte-pair counter is checked against an
independently written reference tokenizer over the same vocab.
"""

import random
import subprocess
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tanglebench.diffmodel import (
    BodyOutsideHunkError,
    BytePairTokenCounter,
    MalformedHunkHeaderError,
    VocabFileInvalidError,
    WhitespaceTokenCounter,
    count_tokens,
    make_counter,
    parse_unified_diff,
)

ASSETS = Path(__file__).resolve().parents[1] / "src" / "tanglebench" / "assets"

TWO_FILE_DIFF = (
    "diff --git a/alpha.py b/alpha.py\n"
    "index 0000001..0000002 100644\n"
    "--- a/alpha.py\n"
    "+++ b/alpha.py\n"
    "@@ -1,3 +1,3 @@\n"
    " def run():\n"
    "-    return 1\n"
    "+    return 2\n"
    "diff --git a/beta.py b/beta.py\n"
    "index 0000003..0000004 100644\n"
    "--- a/beta.py\n"
    "+++ b/beta.py\n"
    "@@ -10,2 +10,3 @@ class Beta:\n"
    "     pass\n"
    "+    # note\n"
    " \n"
)


# --- structural parsing -------------------------------------------------------


def test_two_file_diff_structure():
    doc = parse_unified_diff(TWO_FILE_DIFF)
    assert len(doc.files) == 2
    assert [len(f.hunks) for f in doc.files] == [1, 1]
    assert doc.files[0].header_lines[0].startswith("diff --git a/alpha.py")
    assert doc.files[1].hunks[0].hunk_header.startswith("@@ -10,2 +10,3 @@")
    assert doc.render() == TWO_FILE_DIFF


def test_empty_input_gives_empty_document():
    doc = parse_unified_diff("")
    assert doc.files == []
    assert doc.render() == ""


def test_hunk_without_file_header_is_rejected():
    with pytest.raises(BodyOutsideHunkError):
        parse_unified_diff("@@ -1 +1 @@\n+x")


def test_content_before_any_file_is_rejected():
    with pytest.raises(BodyOutsideHunkError):
        parse_unified_diff("hello world\n")


def test_malformed_hunk_header():
    bad = "diff --git a/x b/x\n--- a/x\n+++ b/x\n@@ -1 +1@@\n+x\n"
    with pytest.raises(MalformedHunkHeaderError):
        parse_unified_diff(bad)


def test_overlong_hunk_body_is_rejected():
    bad = (
        "diff --git a/x b/x\n--- a/x\n+++ b/x\n"
        "@@ -1,1 +1,1 @@\n x\n extra context\n"
    )
    with pytest.raises(BodyOutsideHunkError):
        parse_unified_diff(bad)


def test_short_hunk_followed_by_hunk_header_is_rejected():
    bad = (
        "diff --git a/x b/x\n--- a/x\n+++ b/x\n"
        "@@ -1,5 +1,5 @@\n x\n@@ -9,1 +9,1 @@\n y\n"
    )
    with pytest.raises(MalformedHunkHeaderError):
        parse_unified_diff(bad)


def test_truncated_hunk_before_next_file_is_tolerated():
    # header-preserving truncation cuts hunk tails but keeps later file
    # headers; reparsing that output must work
    text = (
        "diff --git a/x b/x\n--- a/x\n+++ b/x\n"
        "@@ -1,5 +1,5 @@\n x\n+y\n"
        "diff --git a/z b/z\n--- a/z\n+++ b/z\n"
        "@@ -1,1 +1,1 @@\n q\n"
    )
    doc = parse_unified_diff(text)
    assert len(doc.files) == 2
    assert doc.render() == text


def test_no_newline_marker_kept_in_hunk():
    text = (
        "diff --git a/x b/x\n--- a/x\n+++ b/x\n"
        "@@ -1,1 +1,1 @@\n"
        "-old\n"
        "\\ No newline at end of file\n"
        "+new\n"
        "\\ No newline at end of file\n"
    )
    doc = parse_unified_diff(text)
    assert len(doc.files[0].hunks) == 1
    assert doc.render() == text


def test_blank_context_line_counts_for_both_sides():
    text = "diff --git a/x b/x\n--- a/x\n+++ b/x\n@@ -1,2 +1,2 @@\n x\n\n"
    doc = parse_unified_diff(text)
    assert doc.files[0].hunks[0].body_lines == [" x\n", "\n"]
    assert doc.render() == text


def test_header_only_file_then_another_file():
    text = (
        "diff --git a/run.sh b/run.sh\n"
        "old mode 100644\n"
        "new mode 100755\n"
        "diff --git a/x b/x\n--- a/x\n+++ b/x\n@@ -1,1 +1,1 @@\n-a\n+b\n"
    )
    doc = parse_unified_diff(text)
    assert len(doc.files) == 2
    assert doc.files[0].hunks == []
    assert doc.render() == text


def test_plain_unified_style_without_git_header():
    text = "--- a/x\n+++ b/x\n@@ -1,1 +1,2 @@\n keep\n+add\n"
    doc = parse_unified_diff(text)
    assert len(doc.files) == 1
    assert doc.render() == text


def test_deletion_lines_starting_with_dashes_inside_hunk():
    # deleting a line that itself starts with "-- " must not be read as a
    # file header while the hunk counts are open
    text = (
        "diff --git a/x b/x\n--- a/x\n+++ b/x\n"
        "@@ -1,2 +1,1 @@\n"
        "--- not a header\n"
        " keep\n"
    )
    doc = parse_unified_diff(text)
    assert len(doc.files) == 1
    assert doc.files[0].hunks[0].body_lines[0] == "--- not a header\n"
    assert doc.render() == text


def test_crlf_and_missing_final_newline_round_trip():
    text = "diff --git a/x b/x\r\n--- a/x\r\n+++ b/x\r\n@@ -1,1 +1,1 @@\r\n-a\r\n+b"
    doc = parse_unified_diff(text)
    assert doc.render() == text


def test_blank_separator_between_segments_attaches_to_next_header():
    text = (
        "diff --git a/x b/x\n--- a/x\n+++ b/x\n@@ -1,1 +1,1 @@\n-a\n+b\n"
        "\n"
        "diff --git a/y b/y\n--- a/y\n+++ b/y\n@@ -1,1 +1,1 @@\n-c\n+d\n"
    )
    doc = parse_unified_diff(text)
    assert len(doc.files) == 2
    assert doc.files[1].header_lines[0] == "\n"
    assert doc.render() == text


def test_trailing_unattached_blank_is_rejected():
    with pytest.raises(BodyOutsideHunkError):
        parse_unified_diff(
            "diff --git a/x b/x\n--- a/x\n+++ b/x\n@@ -1,1 +1,1 @@\n-a\n+b\n\n"
        )


def test_repeated_parse_is_structurally_equal():
    first = parse_unified_diff(TWO_FILE_DIFF)
    second = parse_unified_diff(TWO_FILE_DIFF)
    assert first == second


# --- real diffs from git -------------------------------------------------------


def _run_git(repo: Path, *args: str) -> bytes:
    return subprocess.run(
        ["git", *args], cwd=repo, check=True, capture_output=True
    ).stdout


@pytest.fixture(scope="session")
def real_git_diffs(tmp_path_factory) -> list[str]:
    """>= 100 genuine `git diff` documents from a scripted repository."""
    repo = tmp_path_factory.mktemp("gitrepo")
    _run_git(repo, "init", "-q")
    _run_git(repo, "config", "user.email", "dev@example.com")
    _run_git(repo, "config", "user.name", "dev")
    _run_git(repo, "config", "core.autocrlf", "false")

    rng = random.Random(99)
    words = ["alpha", "beta", "gamma", "delta", "retry", "queue", "état", "数据", "token"]

    def content(lines: int, missing_newline: bool = False) -> str:
        rows = [
            f"{rng.choice(words)} {rng.choice(words)} {rng.randrange(1000)}"
            for _ in range(lines)
        ]
        text = "\n".join(rows)
        return text if missing_newline else text + "\n"

    paths = [repo / f"src/file_{i}.txt" for i in range(8)]
    for path in paths:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content(rng.randrange(5, 30)), encoding="utf-8")
    _run_git(repo, "add", "-A")
    _run_git(repo, "commit", "-q", "-m", "seed")

    diffs: list[str] = []
    for round_index in range(16):
        touched = rng.sample(paths, rng.randrange(2, 5))
        for path in touched:
            op = rng.randrange(6)
            if op == 0 or not path.exists():
                path.write_text(content(rng.randrange(3, 25)), encoding="utf-8")
            elif op == 1:
                path.unlink()
            elif op == 2:
                old = path.read_text(encoding="utf-8").splitlines()
                keep = [l for l in old if rng.random() > 0.3]
                keep.extend(content(rng.randrange(1, 6)).splitlines())
                path.write_text("\n".join(keep) + "\n", encoding="utf-8")
            elif op == 3:
                path.write_text(content(rng.randrange(2, 12), missing_newline=True),
                                encoding="utf-8")
            elif op == 4:
                path.chmod(0o755 if round_index % 2 else 0o644)
                with path.open("a", encoding="utf-8") as fh:
                    fh.write(content(2))
            else:
                moved = path.with_name(f"moved_{round_index}_{path.name}")
                path.rename(moved)
        for path in list(repo.glob("src/*")):
            one = _run_git(repo, "diff", "--", str(path.relative_to(repo))).decode("utf-8")
            if one:
                diffs.append(one)
        whole = _run_git(repo, "diff").decode("utf-8")
        if whole:
            diffs.append(whole)
        _run_git(repo, "add", "-A")
        _run_git(repo, "commit", "-q", "-m", f"round {round_index}")
    return diffs


def test_real_git_diffs_round_trip(real_git_diffs):
    assert len(real_git_diffs) >= 100
    for diff in real_git_diffs:
        doc = parse_unified_diff(diff)
        assert doc.render() == diff
        assert all(f.header_lines for f in doc.files)


# --- token counting -------------------------------------------------------------


def test_whitespace_counter_examples():
    counter = WhitespaceTokenCounter()
    assert count_tokens(counter, "a b  c") == 3
    assert count_tokens(counter, "") == 0
    assert count_tokens(counter, "  \n\t ") == 0


@given(st.text())
def test_whitespace_counter_deterministic_and_nonnegative(text):
    counter = WhitespaceTokenCounter()
    assert counter.count(text) == counter.count(text) >= 0


@given(st.text(), st.text())
def test_whitespace_counter_monotone_under_concatenation(a, b):
    counter = WhitespaceTokenCounter()
    assert counter.count(a + b) >= max(counter.count(a), counter.count(b))


SAMPLE_VOCAB = ASSETS / "sample_vocab.json"
BPE_FIXTURE = Path(__file__).parent / "data" / "bpe_sample.txt"
# Computed once by reference_bpe_count below over the fixture file; frozen.
BPE_FIXTURE_FROZEN_COUNT = None  # set after the reference run; see test


def reference_bpe_count(text: str, merges: list[tuple[str, str]]) -> int:
    """Independent re-implementation of ranked byte-pair counting."""
    ranks = {(a, b): i for i, (a, b) in enumerate(merges)}
    total = 0
    for word in text.split():
        symbols = list(word)
        while len(symbols) > 1:
            present = {
                (symbols[i], symbols[i + 1]) for i in range(len(symbols) - 1)
            } & set(ranks)
            if not present:
                break
            best = min(present, key=lambda pair: ranks[pair])
            rebuilt: list[str] = []
            i = 0
            while i < len(symbols):
                if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == best:
                    rebuilt.append(symbols[i] + symbols[i + 1])
                    i += 2
                else:
                    rebuilt.append(symbols[i])
                    i += 1
            symbols = rebuilt
        total += len(symbols)
    return total


def test_bpe_counter_matches_reference_on_fixture():
    counter = BytePairTokenCounter.from_vocab_file(SAMPLE_VOCAB)
    text = BPE_FIXTURE.read_text(encoding="utf-8")
    expected = reference_bpe_count(text, counter.merges)
    assert expected == 201  # frozen from the reference implementation
    assert counter.count(text) == expected


def test_bpe_counter_basics():
    counter = BytePairTokenCounter.from_vocab_file(SAMPLE_VOCAB)
    assert counter.count("") == 0
    assert counter.count("the the") == 2  # t+h -> th, th+e -> the, twice
    assert counter.count("feat") == 1
    assert counter.count("zzz qqq") == 6  # no merges apply


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="abcdefinorstux+- @\n", max_size=60))
def test_bpe_counter_matches_reference_property(text):
    counter = BytePairTokenCounter.from_vocab_file(SAMPLE_VOCAB)
    assert counter.count(text) == reference_bpe_count(text, counter.merges)


@given(
    st.text(alphabet="abcdefinorstux ", max_size=40),
    st.text(alphabet="abcdefinorstux ", max_size=40),
)
def test_bpe_counter_additive_across_whitespace_seams(a, b):
    counter = BytePairTokenCounter.from_vocab_file(SAMPLE_VOCAB)
    assert counter.count(a + "\n" + b) == counter.count(a) + counter.count(b)
    assert counter.count(a + "\n" + b) >= max(counter.count(a), counter.count(b))


def test_vocab_file_errors(tmp_path):
    missing = tmp_path / "nope.json"
    with pytest.raises(VocabFileInvalidError):
        BytePairTokenCounter.from_vocab_file(missing)
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json", encoding="utf-8")
    with pytest.raises(VocabFileInvalidError):
        BytePairTokenCounter.from_vocab_file(bad_json)
    wrong_shape = tmp_path / "shape.json"
    wrong_shape.write_text('{"merges": [["a", "b", "c"]]}', encoding="utf-8")
    with pytest.raises(VocabFileInvalidError):
        BytePairTokenCounter.from_vocab_file(wrong_shape)
    empty_part = tmp_path / "empty.json"
    empty_part.write_text('{"merges": [["a", ""]]}', encoding="utf-8")
    with pytest.raises(VocabFileInvalidError):
        BytePairTokenCounter.from_vocab_file(empty_part)


def test_make_counter_specs():
    assert make_counter("whitespace").scheme == "whitespace"
    assert make_counter(f"bpe:{SAMPLE_VOCAB}").scheme == "byte-pair"
    with pytest.raises(ValueError):
        make_counter("gpt2")
