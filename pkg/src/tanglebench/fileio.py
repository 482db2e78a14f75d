"""Shared file helpers: canonical JSON, JSON Lines, hashes, manifests.

Canonical JSON (sorted keys, compact separators, raw UTF-8) keeps dataset
files byte-identical across runs and platforms for the same inputs.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Iterable


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(canonical_json(row))
            fh.write("\n")


def read_jsonl(path: str | Path) -> list[dict]:
    rows = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def manifest_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".manifest.json")


def write_manifest(data_path: str | Path, manifest: dict) -> Path:
    target = manifest_path(data_path)
    target.write_text(canonical_json(manifest) + "\n", encoding="utf-8")
    return target


def read_manifest(data_path: str | Path) -> dict | None:
    target = manifest_path(data_path)
    if not target.exists():
        return None
    return json.loads(target.read_text(encoding="utf-8"))
