"""Deterministic generator for the shipped sample corpus.

Produces a labeled single-concern commit corpus large enough to drive the
full pipeline (>= 450 verified atomic commits per label), with realistic
CCS-style messages and well-formed git diffs, plus a sprinkling of records
that ingestion must drop: excluded types, unknown labels, empty fields,
mistyped objects, oversized diffs, and unverified commits.

Everything is derived from one seed, so regenerating with the same arguments
reproduces the file byte for byte.
"""

from __future__ import annotations

import random
from pathlib import Path

from .fileio import write_jsonl

_THEMES = {
    "feat": {
        "paths": ["src/api/handlers.py", "src/core/engine.py", "src/models/account.py",
                  "src/services/billing.py", "src/cli/commands.py", "src/web/routes.py"],
        "subjects": ["pagination for project listings", "rate limiting on login",
                     "export to CSV", "bulk archive action", "webhook retries",
                     "optional TLS verification", "per-user quotas", "search filters",
                     "session pinning", "draft autosave"],
        "verbs": ["add", "introduce", "support", "implement"],
        "code": ["def {name}(request, context):", "    limit = options.get('limit', {num})",
                 "    queue.push(item, priority={num})", "    return Response(payload, status=200)",
                 "    emit('{name}', payload)", "    registry.register('{name}', handler)"],
    },
    "fix": {
        "paths": ["src/core/scheduler.py", "src/api/serializers.py", "src/utils/dates.py",
                  "src/services/sync.py", "src/models/invoice.py", "src/web/forms.py"],
        "subjects": ["off-by-one in page cursor", "crash on empty payload",
                     "race in cache invalidation", "timezone drift in reports",
                     "double submit on slow networks", "leak in connection pool",
                     "wrong rounding of totals", "stale ETag comparison",
                     "unicode handling in slugs", "retry loop on 4xx responses"],
        "verbs": ["fix", "correct", "resolve", "prevent"],
        "code": ["    if cursor is None:", "        cursor = {num}",
                 "    total = round(total, 2)", "    conn.close()",
                 "    if not payload:", "        return None",
                 "    deadline = now + timedelta(seconds={num})"],
    },
    "refactor": {
        "paths": ["src/core/pipeline.py", "src/services/notifier.py", "src/api/router.py",
                  "src/models/base.py", "src/utils/config.py", "src/core/validators.py"],
        "subjects": ["extract retry policy helper", "inline redundant adapter layer",
                     "split monolithic handler", "rename ambiguous manager classes",
                     "replace nested conditionals with guard clauses",
                     "move serialization into the model", "deduplicate query builders",
                     "simplify event dispatch", "flatten callback chain",
                     "hoist constants out of loops"],
        "verbs": ["refactor", "restructure", "simplify", "extract"],
        "code": ["class {name}Policy:", "    def apply(self, item):",
                 "        return self._delegate(item)", "    # moved from handlers",
                 "def _build_query(filters):", "    return Query(filters, limit={num})"],
    },
    "docs": {
        "paths": ["README.md", "docs/configuration.md", "docs/deployment.md",
                  "docs/api/endpoints.md", "docs/contributing.md", "CHANGELOG.md"],
        "subjects": ["document the retry settings", "clarify upgrade steps",
                     "add troubleshooting section", "describe webhook payloads",
                     "explain quota semantics", "update quickstart example",
                     "document environment variables", "add architecture overview",
                     "fix broken links in guide", "describe release cadence"],
        "verbs": ["docs", "document", "clarify", "describe"],
        "code": ["## {name}", "The `{name}` option controls batching (default {num}).",
                 "See the deployment guide for details.", "- `{name}`: enable verbose output",
                 "Example: run with `--workers {num}`.", "> Note: requires version {num} or newer."],
    },
    "test": {
        "paths": ["tests/test_scheduler.py", "tests/test_api.py", "tests/test_models.py",
                  "tests/test_sync.py", "tests/unit/test_dates.py", "tests/test_cli.py"],
        "subjects": ["cover cursor wraparound", "add regression test for empty payload",
                     "test timezone conversions", "cover retry exhaustion",
                     "add fixtures for billing plans", "test slug uniqueness",
                     "cover error serialization", "parametrize quota checks",
                     "test webhook signature validation", "cover config reload"],
        "verbs": ["test", "cover", "verify", "assert"],
        "code": ["def test_{name}():", "    result = run_pipeline(sample_{num})",
                 "    assert result.status == 'ok'", "    assert len(items) == {num}",
                 "    with pytest.raises(ValueError):", "        parse(payload)"],
    },
    "build": {
        "paths": ["pyproject.toml", "Makefile", "setup.cfg", "requirements.txt",
                  "Dockerfile", "scripts/package.sh"],
        "subjects": ["pin transitive dependencies", "bump build image to slim variant",
                     "add wheel metadata", "split dev requirements",
                     "cache compiled assets", "drop legacy setup script",
                     "enable reproducible builds", "bump minimum runtime version",
                     "strip debug symbols in release", "vendor the protocol schemas"],
        "verbs": ["build", "pin", "bump", "package"],
        "code": ["requests>={num}.0", "COPY --from=builder /app /app",
                 "\tpip install -e .[dev]", "[tool.{name}]", "line-length = {num}",
                 "RUN make {name}"],
    },
    "ci": {
        "paths": [".github/workflows/test.yml", ".github/workflows/release.yml",
                  ".gitlab-ci.yml", "ci/pipeline.yml", ".github/workflows/lint.yml",
                  "ci/nightly.yml"],
        "subjects": ["run tests on pull requests", "cache dependency downloads",
                     "add nightly compatibility job", "upload coverage artifacts",
                     "matrix over supported runtimes", "retry flaky integration stage",
                     "lint workflow files", "publish preview builds",
                     "gate merges on type checks", "parallelize the test stage"],
        "verbs": ["ci", "run", "cache", "gate"],
        "code": ["  {name}:", "    runs-on: ubuntu-latest", "      - uses: actions/checkout@v4",
                 "      - run: make test", "    timeout-minutes: {num}",
                 "    if: github.event_name == 'pull_request'"],
    },
}

_NAMES = ["export", "sync", "retry", "quota", "cursor", "billing", "webhook", "session",
          "archive", "notify", "ingest", "rollup", "digest", "mirror", "replay", "audit"]


def _code_line(rng: random.Random, theme: dict, uid: int) -> str:
    template = rng.choice(theme["code"])
    return template.format(name=rng.choice(_NAMES) + f"_{uid % 97}", num=rng.randrange(1, 500))


def _make_hunk(rng: random.Random, theme: dict, uid: int, old_start: int, new_start: int,
               body_size: int | None = None) -> tuple[str, int, int]:
    lines: list[str] = []
    old_count = 0
    new_count = 0
    size = body_size if body_size is not None else rng.randrange(3, 11)
    for _ in range(size):
        kind = rng.choices(("ctx", "add", "del"), weights=(4, 3, 2))[0]
        text = _code_line(rng, theme, uid)
        if kind == "ctx":
            lines.append(" " + text)
            old_count += 1
            new_count += 1
        elif kind == "add":
            lines.append("+" + text)
            new_count += 1
        else:
            lines.append("-" + text)
            old_count += 1
    header = f"@@ -{old_start},{old_count} +{new_start},{new_count} @@"
    body = "\n".join(lines)
    return header + "\n" + body + "\n", old_start + old_count, new_start + new_count


def _make_file_diff(rng: random.Random, path: str, theme: dict, uid: int,
                    hunks: int | None = None, body_size: int | None = None) -> str:
    mark_a = f"{uid % 0xFFFFFF:07x}"
    mark_b = f"{(uid * 31 + 7) % 0xFFFFFF:07x}"
    parts = [
        f"diff --git a/{path} b/{path}\n",
        f"index {mark_a}..{mark_b} 100644\n",
        f"--- a/{path}\n",
        f"+++ b/{path}\n",
    ]
    hunk_count = hunks if hunks is not None else rng.randrange(1, 4)
    old_pos = rng.randrange(1, 40)
    new_pos = old_pos
    for _ in range(hunk_count):
        hunk_text, old_end, new_end = _make_hunk(rng, theme, uid, old_pos, new_pos, body_size)
        parts.append(hunk_text)
        gap = rng.randrange(2, 30)
        old_pos = old_end + gap
        new_pos = new_end + gap
    return "".join(parts)


def make_record(rng: random.Random, label: str, uid: int, oversized: bool = False) -> dict:
    theme = _THEMES[label]
    verb = rng.choice(theme["verbs"])
    subject = rng.choice(theme["subjects"])
    scope = rng.choice(["", "", "", f"({rng.choice(_NAMES)})"])
    message = f"{label}{scope}: {verb} {subject}"
    if rng.random() < 0.3:
        message += f"\n\nKeeps behaviour compatible with release {rng.randrange(1, 9)}."
    file_count = 1 if rng.random() < 0.7 else 2
    paths = rng.sample(theme["paths"], file_count)
    if oversized:
        diff = _make_file_diff(rng, paths[0], theme, uid, hunks=3, body_size=220)
    else:
        diff = "".join(_make_file_diff(rng, p, theme, uid + i) for i, p in enumerate(paths))
    return {
        "id": f"{label}-{uid:05d}",
        "label": label,
        "message": message,
        "diff": diff,
        "verified_atomic": True,
    }


def generate_corpus_rows(per_label: int = 470, seed: int = 13) -> list[dict]:
    """All corpus rows: per_label verified eligible records per label, plus
    deliberate rejects exercising every ingestion and sampling filter."""
    rng = random.Random(seed)
    rows: list[dict] = []
    uid = 0
    for label in _THEMES:
        for _ in range(per_label):
            rows.append(make_record(rng, label, uid))
            uid += 1
        for _ in range(3):  # over the default pool token limit
            rows.append(make_record(rng, label, uid, oversized=True))
            uid += 1
        for _ in range(2):  # not manually verified
            record = make_record(rng, label, uid)
            record["verified_atomic"] = False
            rows.append(record)
            uid += 1

    theme = _THEMES["fix"]
    for label in ("perf", "style", "chore"):
        for _ in range(2):
            rows.append(
                {
                    "id": f"{label}-{uid:05d}",
                    "label": label,
                    "message": f"{label}: tweak internals",
                    "diff": _make_file_diff(rng, "src/misc.py", theme, uid),
                    "verified_atomic": True,
                }
            )
            uid += 1
    for label in ("wip", "misc", "release"):
        rows.append(
            {
                "id": f"odd-{uid:05d}",
                "label": label,
                "message": f"{label}: assorted changes",
                "diff": _make_file_diff(rng, "src/misc.py", theme, uid),
                "verified_atomic": True,
            }
        )
        uid += 1
    rows.append({"id": f"bad-{uid:05d}", "label": "fix", "message": "",
                 "diff": _make_file_diff(rng, "src/misc.py", theme, uid), "verified_atomic": True})
    uid += 1
    rows.append({"id": f"bad-{uid:05d}", "label": "fix", "message": "fix: empty diff",
                 "diff": "", "verified_atomic": True})
    uid += 1
    rows.append({"id": f"bad-{uid:05d}", "message": "no label at all",
                 "diff": "diff --git a/x b/x\n", "verified_atomic": True})
    return rows


def write_sample_corpus(path: str | Path, per_label: int = 470, seed: int = 13) -> int:
    rows = generate_corpus_rows(per_label=per_label, seed=seed)
    write_jsonl(path, rows)
    return len(rows)
