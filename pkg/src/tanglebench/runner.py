"""CLI orchestration: pool building, tangling, experiment grids, reports.

Subcommands
    make-sample-corpus  write the deterministic sample corpus
    build-pool          corpus file -> balanced atomic pool
    split               pool -> train/eval pools (exact 8:2)
    tangle              pool -> tangled dataset
    run                 execute a grid of (concern count, message, budget)
                        cells against an endpoint or the loopback mock
    compare             pairwise statistics between two outcome logs
    report              aggregate one outcome log into CSV + Markdown

The run command is raw-log-first: every (cell, sample, run) outcome is
appended to a JSON Lines log with full provenance, and all statistics are
recomputed from that log, so reports never require re-querying a model.
An existing log is resumed: only missing (cell, sample, run) triples are
executed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from . import analytics
from .budget import DEFAULT_BUDGET_GRID, TokenBudget, truncate
from .corpus import (
    ATOMICITY_FILTERS,
    CorpusError,
    load_corpus,
    read_pool,
    sample_atomic_pool,
    split_pool,
    write_pool,
)
from .diffmodel import TokenCounter, make_counter
from .fileio import (
    canonical_json,
    read_manifest,
    sha256_file,
    write_manifest,
)
from .inference import DecodingConfig, EndpointConfig, run_repeated
from .mockserver import GROUND_TRUTH_HEADER, MockConfig, MockServer, parse_mock_spec
from .promptkit import PromptTemplate, build_prompt, default_template
from .sampledata import write_sample_corpus
from .tangler import (
    TangledDataset,
    TanglerError,
    generate_tangled,
    read_dataset,
    write_dataset,
)
from .taxonomy import LabelSet


class RunnerError(Exception):
    pass


# --- small parsers ----------------------------------------------------------


def parse_counts(text: str) -> tuple[int, ...]:
    """Parse "1..5" or "1,2,4"."""
    text = text.strip()
    if ".." in text:
        lo, _, hi = text.partition("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(sorted({int(part) for part in text.split(",") if part.strip()}))


def parse_budgets(text: str) -> tuple[int, ...]:
    return tuple(sorted({int(part) for part in text.split(",") if part.strip()}))


def parse_message_arms(text: str) -> tuple[bool, ...]:
    choices = {"on": (True,), "off": (False,), "both": (True, False)}
    if text not in choices:
        raise RunnerError(f"--message must be on, off, or both (got {text!r})")
    return choices[text]


def load_config_file(path: Path) -> dict[str, str]:
    """Flat ``key = value`` config document; '#' starts a comment line."""
    values: dict[str, str] = {}
    for line_number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise RunnerError(f"{path}:{line_number}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip().strip("\"'")
    return values


_CONFIG_PATH_KEYS = ("dataset", "out")
_CONFIG_KEYS = (
    "dataset", "out", "base_url", "model", "api_key_env", "mock", "budgets",
    "counts", "message", "runs", "seed", "counter", "limit", "timeout",
    "max_in_flight", "max_retries", "max_output_tokens",
)


def apply_config_file(args: argparse.Namespace) -> None:
    """Fill unset run options from the config document, resolving paths
    relative to the config file."""
    if not getattr(args, "config", None):
        return
    config_path = Path(args.config)
    values = load_config_file(config_path)
    unknown = set(values) - set(_CONFIG_KEYS)
    if unknown:
        raise RunnerError(f"{config_path}: unknown config keys: {', '.join(sorted(unknown))}")
    for key, value in values.items():
        if getattr(args, key, None) is None:
            if key in _CONFIG_PATH_KEYS:
                value = str((config_path.parent / value).resolve())
            setattr(args, key, value)


# --- experiment configuration and grid execution ----------------------------


@dataclass
class ExperimentConfig:
    dataset_path: Path
    out_path: Path
    endpoint: EndpointConfig
    decoding: DecodingConfig
    counts: tuple[int, ...]
    message_arms: tuple[bool, ...]
    budgets: tuple[int, ...]
    runs: int = 3
    seed: int = 0
    counter: TokenCounter = field(default_factory=lambda: make_counter("whitespace"))
    counter_spec: str = "whitespace"
    limit: int | None = None
    mock: MockConfig | None = None

    def __post_init__(self) -> None:
        if not self.counts or not self.message_arms or not self.budgets:
            raise RunnerError("grid axes (counts, message arms, budgets) must be non-empty")
        if self.runs < 1:
            raise RunnerError("runs must be >= 1")


def _outcome_key(row: dict) -> tuple:
    return (row["n"], row["include_message"], row["budget"], row["sample_id"], row["run"])


def _load_log(path: Path) -> list[dict]:
    rows: list[dict] = []
    if not path.exists():
        return rows
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError:
            break  # torn final line from an interrupted run; redo that item
    return rows


def execute_grid(config: ExperimentConfig, dataset: TangledDataset) -> list[dict]:
    """Run every missing (cell, sample, run) triple and append outcomes to the
    log at config.out_path. Returns all outcome rows, existing plus new."""
    template = default_template()
    samples_by_count = {n: dataset.by_count(n) for n in config.counts}
    for n, samples in samples_by_count.items():
        if not samples:
            raise RunnerError(f"dataset has no samples with concern count {n}")
        if config.limit:
            samples_by_count[n] = samples[: config.limit]

    dataset_hash = sha256_file(config.dataset_path)
    manifest = {
        "kind": "outcome-log",
        "dataset_sha256": dataset_hash,
        "prompt_sha256": template.fingerprint(),
        "endpoint": {"base_url": config.endpoint.base_url, "model": config.endpoint.model_name},
        "decoding": {
            "temperature": config.decoding.temperature,
            "seed": config.decoding.seed,
            "max_output_tokens": config.decoding.max_output_tokens,
        },
        "grid": {
            "counts": list(config.counts),
            "message_arms": list(config.message_arms),
            "budgets": list(config.budgets),
        },
        "runs": config.runs,
        "seed": config.seed,
        "counter": config.counter_spec,
        "limit": config.limit,
        "mock": config.mock.mode if config.mock else None,
    }
    existing_manifest = read_manifest(config.out_path)
    existing = _load_log(config.out_path)
    if existing and existing_manifest is not None:
        if existing_manifest.get("dataset_sha256") != dataset_hash:
            raise RunnerError(
                f"{config.out_path}: existing log was produced from a different dataset; "
                "use --fresh to overwrite"
            )
    write_manifest(config.out_path, manifest)
    done = {_outcome_key(row) for row in existing}

    rows = list(existing)
    config.out_path.parent.mkdir(parents=True, exist_ok=True)
    with config.out_path.open("a", encoding="utf-8", newline="\n") as log:
        for n in config.counts:
            samples = samples_by_count[n]
            truth = {s.id: s.labels.to_strings() for s in samples}
            for include_message in config.message_arms:
                for limit_tokens in config.budgets:
                    plan = []
                    for sample in samples:
                        truncated = truncate(
                            sample, include_message, TokenBudget(limit_tokens), config.counter
                        )
                        plan.append((sample.id, build_prompt(template, truncated, include_message)))
                    headers_for = None
                    if config.mock is not None:
                        headers_for = lambda sid, t=truth: {GROUND_TRUTH_HEADER: ",".join(t[sid])}
                    for run in range(1, config.runs + 1):
                        missing = [
                            item
                            for item in plan
                            if (n, include_message, limit_tokens, item[0], run) not in done
                        ]
                        if not missing:
                            continue
                        results = run_repeated(
                            config.endpoint, config.decoding, missing, runs=1,
                            headers_for=headers_for,
                        )[0]
                        for (sample_id, _prompt), outcome in zip(missing, results):
                            row = {
                                "sample_id": sample_id,
                                "n": n,
                                "include_message": include_message,
                                "budget": limit_tokens,
                                "run": run,
                                "labels_true": truth[sample_id],
                                "labels_pred": outcome.parsed.labels.to_strings(),
                                "status": outcome.parsed.status,
                                "latency_seconds": outcome.latency_seconds,
                                "request_tokens": outcome.request_tokens,
                                "attempt": outcome.attempt,
                                "error": outcome.error,
                            }
                            log.write(canonical_json(row) + "\n")
                            log.flush()
                            rows.append(row)
    return rows


# --- aggregation ------------------------------------------------------------


def row_hamming_loss(row: dict) -> float:
    pred = LabelSet.from_strings(row["labels_pred"])
    truth = LabelSet.from_strings(row["labels_true"])
    return analytics.hamming_loss(pred, truth)


def _cell_of(row: dict) -> tuple[int, bool, int]:
    return (row["n"], row["include_message"], row["budget"])


def aggregate_cells(rows: Sequence[dict]) -> dict[tuple[int, bool, int], dict]:
    """Per-cell aggregates: Hamming loss stats over all outcomes, latency
    stats over successful outcomes after IQR outlier removal."""
    cells: dict[tuple[int, bool, int], list[dict]] = {}
    for row in rows:
        cells.setdefault(_cell_of(row), []).append(row)

    out: dict[tuple[int, bool, int], dict] = {}
    for cell in sorted(cells, key=lambda c: (c[0], not c[1], c[2])):
        cell_rows = cells[cell]
        losses = [row_hamming_loss(r) for r in cell_rows]
        latencies = [
            r["latency_seconds"] for r in cell_rows
            if r.get("error") is None and r.get("latency_seconds") is not None
        ]
        failures = sum(1 for r in cell_rows if r.get("error") is not None)
        statuses: dict[str, int] = {}
        for r in cell_rows:
            statuses[r["status"]] = statuses.get(r["status"], 0) + 1
        entry = {
            "outcomes": len(cell_rows),
            "samples": len({r["sample_id"] for r in cell_rows}),
            "failures": failures,
            "statuses": statuses,
            "hl": analytics.summarize(losses),
        }
        if latencies:
            kept, removed = analytics.iqr_filter(latencies)
            entry["latency"] = analytics.summarize(kept)
            entry["latency_outliers_removed"] = len(removed)
        else:
            entry["latency"] = {"count": 0}
            entry["latency_outliers_removed"] = 0
        out[cell] = entry
    return out


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _fmt_p(p: float) -> str:
    return "< 0.001" if p < 0.001 else f"{p:.3f}"


def write_report(log_path: Path, out_dir: Path) -> dict[tuple[int, bool, int], dict]:
    rows = _load_log(log_path)
    if not rows:
        raise RunnerError(f"outcome log {log_path} is empty")
    manifest = read_manifest(log_path) or {}
    cells = aggregate_cells(rows)
    out_dir.mkdir(parents=True, exist_ok=True)

    outcome_lines = ["sample_id,n,include_message,budget,run,hamming_loss,latency_seconds,status,attempt,error"]
    for row in sorted(rows, key=lambda r: (_cell_of(r), r["sample_id"], r["run"])):
        latency = row.get("latency_seconds")
        outcome_lines.append(
            ",".join(
                [
                    row["sample_id"],
                    str(row["n"]),
                    str(row["include_message"]).lower(),
                    str(row["budget"]),
                    str(row["run"]),
                    _fmt(row_hamming_loss(row)),
                    _fmt(latency) if latency is not None else "",
                    row["status"],
                    str(row.get("attempt", "")),
                    (row.get("error") or "").replace(",", ";"),
                ]
            )
        )
    (out_dir / "outcomes.csv").write_text("\n".join(outcome_lines) + "\n", encoding="utf-8")

    cell_lines = [
        "n,include_message,budget,samples,outcomes,failures,"
        "hl_mean,hl_median,hl_q1,hl_q3,"
        "latency_count,latency_mean,latency_median,latency_outliers_removed"
    ]
    for cell, entry in cells.items():
        n, msg, limit_tokens = cell
        hl = entry["hl"]
        lat = entry["latency"]
        cell_lines.append(
            ",".join(
                [
                    str(n),
                    str(msg).lower(),
                    str(limit_tokens),
                    str(entry["samples"]),
                    str(entry["outcomes"]),
                    str(entry["failures"]),
                    _fmt(hl["mean"]),
                    _fmt(hl["median"]),
                    _fmt(hl["q1"]),
                    _fmt(hl["q3"]),
                    str(lat["count"]),
                    _fmt(lat["mean"]) if lat["count"] else "",
                    _fmt(lat["median"]) if lat["count"] else "",
                    str(entry["latency_outliers_removed"]),
                ]
            )
        )
    (out_dir / "cells.csv").write_text("\n".join(cell_lines) + "\n", encoding="utf-8")

    md = ["# Experiment report", ""]
    if manifest:
        md.append(f"- dataset: `{manifest.get('dataset_sha256', 'unknown')}`")
        endpoint = manifest.get("endpoint", {})
        md.append(f"- endpoint: {endpoint.get('base_url', '?')} ({endpoint.get('model', '?')})")
        md.append(f"- prompt: `{manifest.get('prompt_sha256', 'unknown')}`")
        md.append(f"- runs: {manifest.get('runs', '?')}, seed: {manifest.get('seed', '?')}")
        if manifest.get("mock"):
            md.append(f"- mock mode: {manifest['mock']}")
        md.append("")
    md.append("## Per-cell results")
    md.append("")
    md.append(
        "| n | message | budget | samples | outcomes | mean HL | median HL | "
        "median latency (s) | latency outliers removed | failures |"
    )
    md.append("|--:|:--|--:|--:|--:|--:|--:|--:|--:|--:|")
    for cell, entry in cells.items():
        n, msg, limit_tokens = cell
        hl = entry["hl"]
        lat = entry["latency"]
        md.append(
            f"| {n} | {'on' if msg else 'off'} | {limit_tokens} | {entry['samples']} | "
            f"{entry['outcomes']} | {_fmt(hl['mean'])} | {_fmt(hl['median'])} | "
            f"{_fmt(lat['median']) if lat['count'] else '-'} | "
            f"{entry['latency_outliers_removed']} | {entry['failures']} |"
        )
    md.append("")
    md.append("## Parse status counts")
    md.append("")
    md.append("| n | message | budget | " + " | ".join(
        ("ok", "empty", "unparseable", "unknown_labels_dropped")) + " |")
    md.append("|--:|:--|--:|--:|--:|--:|--:|")
    for cell, entry in cells.items():
        n, msg, limit_tokens = cell
        statuses = entry["statuses"]
        md.append(
            f"| {n} | {'on' if msg else 'off'} | {limit_tokens} | "
            + " | ".join(
                str(statuses.get(s, 0))
                for s in ("ok", "empty", "unparseable", "unknown_labels_dropped")
            )
            + " |"
        )
    md.append("")
    (out_dir / "report.md").write_text("\n".join(md) + "\n", encoding="utf-8")
    return cells


def compare_logs(path_a: Path, path_b: Path) -> dict:
    """Pairwise Wilcoxon + A12 between two outcome logs over shared cells.

    Pairs are per (cell, sample): the Hamming loss is averaged over runs
    within each log before pairing. A12 < 0.5 means log A tends to lower
    losses (more accurate) than log B.
    """
    rows_a = _load_log(path_a)
    rows_b = _load_log(path_b)
    if not rows_a or not rows_b:
        raise RunnerError("both outcome logs must be non-empty")

    def per_sample(rows: Sequence[dict]) -> dict[tuple, list[float]]:
        grouped: dict[tuple, list[float]] = {}
        for row in rows:
            key = (_cell_of(row), row["sample_id"])
            grouped.setdefault(key, []).append(row_hamming_loss(row))
        return {k: sum(v) / len(v) for k, v in grouped.items()}  # type: ignore[misc]

    mean_a = per_sample(rows_a)
    mean_b = per_sample(rows_b)
    shared = sorted(set(mean_a) & set(mean_b))
    if not shared:
        raise RunnerError("the two logs share no (cell, sample) pairs")

    def compare_subset(keys: Iterable[tuple]) -> dict:
        keys = list(keys)
        x = [mean_a[k] for k in keys]
        y = [mean_b[k] for k in keys]
        try:
            result = analytics.wilcoxon_signed_rank(x, y)
        except analytics.AllDifferencesZeroError:
            return {
                "pairs": len(keys),
                "a12": analytics.vargha_delaney_a12(x, y),
                "p_value": None,
                "method": "degenerate (all differences zero)",
            }
        return {
            "pairs": result.n_pairs,
            "a12": result.a12,
            "magnitude": analytics.a12_magnitude(result.a12),
            "p_value": result.p_value,
            "method": result.method,
        }

    report: dict = {"overall": compare_subset(shared)}
    for axis, index in (("by_concern_count", 0), ("by_message", 1), ("by_budget", 2)):
        groups: dict = {}
        for key in shared:
            groups.setdefault(key[0][index], []).append(key)
        report[axis] = {value: compare_subset(keys) for value, keys in sorted(groups.items())}
    return report


def comparison_markdown(report: dict, name_a: str, name_b: str) -> str:
    md = [f"# Pairwise comparison: {name_a} vs {name_b}", ""]
    md.append("A12 < 0.5 means the first log has lower Hamming loss (more accurate).")
    md.append("")

    def table(title: str, entries: dict) -> None:
        md.append(f"## {title}")
        md.append("")
        md.append("| value | pairs | A12 | magnitude | p-value | method |")
        md.append("|:--|--:|--:|:--|--:|:--|")
        for value, entry in entries.items():
            p = entry["p_value"]
            md.append(
                f"| {value} | {entry['pairs']} | {entry['a12']:.3f} | "
                f"{entry.get('magnitude', '-')} | {_fmt_p(p) if p is not None else '-'} | "
                f"{entry['method']} |"
            )
        md.append("")

    table("Overall", {"all": report["overall"]})
    table("By concern count", report["by_concern_count"])
    table("By message inclusion", report["by_message"])
    table("By token budget", report["by_budget"])
    return "\n".join(md) + "\n"


# --- subcommands ------------------------------------------------------------


def cmd_make_sample_corpus(args: argparse.Namespace) -> int:
    count = write_sample_corpus(args.out, per_label=args.per_label, seed=args.seed)
    print(f"wrote {count} records to {args.out}")
    return 0


def cmd_build_pool(args: argparse.Namespace) -> int:
    counter = make_counter(args.counter)
    records, stats = load_corpus(args.corpus)
    pool = sample_atomic_pool(
        records,
        quota_q=args.quota,
        token_limit=args.token_limit,
        atomicity_filter=ATOMICITY_FILTERS[args.atomicity],
        seed=args.seed,
        counter=counter,
    )
    write_pool(pool, args.out, seed=args.seed, counter=counter)
    print(f"loaded {stats.loaded} records ({stats.total_dropped} dropped: {stats.dropped})")
    print(f"pool: {pool.size} records ({pool.quota_q} per label) -> {args.out}")
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    pool = read_pool(args.pool)
    counter = make_counter(args.counter)
    result = split_pool(pool, seed=args.seed)
    write_pool(result.train, args.train_out, seed=args.seed, counter=counter)
    write_pool(result.eval, args.eval_out, seed=args.seed, counter=counter)
    print(
        f"split {pool.size} records 8:2 -> {result.train.size} train / {result.eval.size} eval"
    )
    return 0


def cmd_tangle(args: argparse.Namespace) -> int:
    pool = read_pool(args.pool)
    counter = make_counter(args.counter)
    counts = parse_counts(args.counts)
    dataset = generate_tangled(
        pool,
        counts=counts,
        per_count_quota=args.quota,
        token_limit=args.token_limit,
        seed=args.seed,
        counter=counter,
    )
    write_dataset(
        dataset, args.out, seed=args.seed, counter=counter, pool_sha256=sha256_file(args.pool)
    )
    print(
        f"tangled dataset: {len(dataset.samples)} samples "
        f"({dataset.per_count_quota} per count over {list(counts)}) -> {args.out}"
    )
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    apply_config_file(args)
    if args.dataset is None or args.out is None:
        raise RunnerError("run requires --dataset and --out (directly or via --config)")

    mock_config: MockConfig | None = None
    if args.mock:
        mock_config = parse_mock_spec(args.mock)
    elif not args.base_url or not args.model:
        raise RunnerError("run requires either --mock or both --base-url and --model")

    out_path = Path(args.out)
    if args.fresh and out_path.exists():
        out_path.unlink()

    runs = int(args.runs) if args.runs is not None else 3
    seed = int(args.seed) if args.seed is not None else 0
    decoding = DecodingConfig(
        temperature=0.0,
        seed=seed,
        max_output_tokens=int(args.max_output_tokens) if args.max_output_tokens else 1024,
    )
    counter_spec = args.counter or "whitespace"
    dataset = read_dataset(args.dataset)
    counts = parse_counts(args.counts) if args.counts else dataset.counts
    budgets = parse_budgets(str(args.budgets)) if args.budgets else DEFAULT_BUDGET_GRID
    message_arms = parse_message_arms(args.message or "on")

    def build_endpoint(base_url: str, model: str) -> EndpointConfig:
        api_key = os.environ.get(args.api_key_env) if args.api_key_env else None
        return EndpointConfig(
            base_url=base_url,
            model_name=model,
            api_key=api_key,
            timeout=float(args.timeout) if args.timeout else 120.0,
            max_in_flight=int(args.max_in_flight) if args.max_in_flight else 1,
            max_retries=int(args.max_retries) if args.max_retries else 3,
        )

    started = time.perf_counter()
    if mock_config is not None:
        with MockServer(mock_config) as server:
            config = ExperimentConfig(
                dataset_path=Path(args.dataset),
                out_path=out_path,
                endpoint=build_endpoint(server.base_url, "loopback-mock"),
                decoding=decoding,
                counts=counts,
                message_arms=message_arms,
                budgets=budgets,
                runs=runs,
                seed=seed,
                counter=make_counter(counter_spec),
                counter_spec=counter_spec,
                limit=int(args.limit) if args.limit else None,
                mock=mock_config,
            )
            rows = execute_grid(config, dataset)
    else:
        config = ExperimentConfig(
            dataset_path=Path(args.dataset),
            out_path=out_path,
            endpoint=build_endpoint(args.base_url, args.model),
            decoding=decoding,
            counts=counts,
            message_arms=message_arms,
            budgets=budgets,
            runs=runs,
            seed=seed,
            counter=make_counter(counter_spec),
            counter_spec=counter_spec,
            limit=int(args.limit) if args.limit else None,
            mock=None,
        )
        rows = execute_grid(config, dataset)
    elapsed = time.perf_counter() - started
    failures = sum(1 for r in rows if r.get("error"))
    print(f"outcome log: {len(rows)} outcomes ({failures} failures) in {elapsed:.1f}s -> {out_path}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    report = compare_logs(Path(args.log_a), Path(args.log_b))
    markdown = comparison_markdown(report, Path(args.log_a).name, Path(args.log_b).name)
    if args.out_md:
        Path(args.out_md).write_text(markdown, encoding="utf-8")
        print(f"comparison written to {args.out_md}")
    else:
        print(markdown, end="")
    if args.out_json:
        Path(args.out_json).write_text(canonical_json(report) + "\n", encoding="utf-8")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    cells = write_report(Path(args.log), Path(args.out_dir))
    print(f"report over {len(cells)} cells -> {args.out_dir}")
    return 0


# --- argument parser --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tanglebench",
        description="Benchmark harness for multi-label concern detection in tangled commits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-sample-corpus", help="write the deterministic sample corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--per-label", type=int, default=470)
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=cmd_make_sample_corpus)

    p = sub.add_parser("build-pool", help="sample a balanced atomic pool from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--quota", type=int, required=True)
    p.add_argument("--token-limit", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--counter", default="whitespace", help="whitespace or bpe:<vocab.json>")
    p.add_argument("--atomicity", choices=sorted(ATOMICITY_FILTERS), default="verified")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_pool)

    p = sub.add_parser("split", help="split a pool into train/eval pools (exact 8:2)")
    p.add_argument("--pool", required=True)
    p.add_argument("--train-out", required=True)
    p.add_argument("--eval-out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--counter", default="whitespace")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("tangle", help="generate the tangled dataset from a pool")
    p.add_argument("--pool", required=True)
    p.add_argument("--counts", default="1..5", help="e.g. 1..5 or 1,2,3")
    p.add_argument("--quota", type=int, required=True)
    p.add_argument("--token-limit", type=int, default=8192)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--counter", default="whitespace")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tangle)

    p = sub.add_parser("run", help="execute an experiment grid")
    p.add_argument("--config", help="flat key = value config document")
    p.add_argument("--dataset")
    p.add_argument("--out")
    p.add_argument("--base-url", dest="base_url")
    p.add_argument("--model")
    p.add_argument("--api-key-env", dest="api_key_env", default="TANGLEBENCH_API_KEY")
    p.add_argument("--mock", help="loopback mock mode, e.g. echo-truth or inject-delay:delay_ms=50")
    p.add_argument("--budgets", help="comma-separated token budgets")
    p.add_argument("--counts", help="concern counts, e.g. 1..5")
    p.add_argument("--message", choices=("on", "off", "both"))
    p.add_argument("--runs")
    p.add_argument("--seed")
    p.add_argument("--counter")
    p.add_argument("--limit", help="use only the first N samples per concern count")
    p.add_argument("--timeout")
    p.add_argument("--max-in-flight", dest="max_in_flight")
    p.add_argument("--max-retries", dest="max_retries")
    p.add_argument("--max-output-tokens", dest="max_output_tokens")
    p.add_argument("--fresh", action="store_true", help="discard an existing outcome log")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="pairwise statistics between two outcome logs")
    p.add_argument("--log-a", required=True)
    p.add_argument("--log-b", required=True)
    p.add_argument("--out-md")
    p.add_argument("--out-json")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="aggregate an outcome log into CSV + Markdown")
    p.add_argument("--log", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RunnerError, CorpusError, TanglerError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
