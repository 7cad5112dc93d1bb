"""Dataset emission: JSON-lines records plus a sidecar manifest.

One record per line with fields {task, prompt, answer, skills, meta}; the
manifest captures the producing config, seed, record count, realized skill
histogram, and a content hash, so identical config + seed reproduces
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from pathlib import Path

__all__ = ["skill_histogram", "write_jsonl", "read_jsonl", "write_dataset"]

RECORD_FIELDS = ("task", "prompt", "answer", "skills", "meta")


def skill_histogram(records) -> dict[int, int]:
    """Counts of every skill index drawn across the records."""
    counts: Counter = Counter()
    for rec in records:
        counts.update(rec["skills"])
    return dict(sorted(counts.items()))


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_jsonl(records, path) -> str:
    """Write records one JSON object per line; returns the content sha256."""
    path = Path(path)
    lines = []
    for rec in records:
        missing = [f for f in RECORD_FIELDS if f not in rec]
        if missing:
            raise ValueError(f"record missing fields {missing}")
        lines.append(_dump(rec))
    data = "\n".join(lines) + ("\n" if lines else "")
    path.write_text(data, encoding="utf-8")
    return hashlib.sha256(data.encode()).hexdigest()


def read_jsonl(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_dataset(records, path, config: dict, seed: int) -> dict:
    """Write data file plus `<path>.manifest.json`; returns the manifest."""
    path = Path(path)
    digest = write_jsonl(records, path)
    manifest = {
        "config": config,
        "seed": seed,
        "num_records": len(records),
        "skill_histogram": {str(k): v for k, v in skill_histogram(records).items()},
        "sha256": digest,
    }
    manifest_path = path.with_name(path.name + ".manifest.json")
    manifest_path.write_text(_dump(manifest) + "\n", encoding="utf-8")
    return manifest
