"""Append-only JSON-lines store of run records."""
from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Iterator, Union

RECORD_FIELDS = (
    "llm", "sample_id", "run_index", "timestamp_utc", "q_val", "refinement_used",
    "timed_out", "scores", "durations_ms", "errors",
)

RecordKey = tuple[str, str, int]


class DuplicateRecord(ValueError):
    pass


def record_key(record: dict) -> RecordKey:
    return record["llm"], record["sample_id"], int(record["run_index"])


def read_records(path: Union[str, Path]) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{n}: {exc}") from exc
    return out


class RecordStore:
    """Single-writer log; a truncated final line from a crash is ignored on load."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._keys: set[RecordKey] = set()
        if self.path.exists():
            for rec in self._read_tolerant():
                self._keys.add(record_key(rec))

    def _read_tolerant(self) -> Iterator[dict]:
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                try:
                    yield json.loads(line)
                except json.JSONDecodeError:
                    continue

    def __contains__(self, key: RecordKey) -> bool:
        return key in self._keys

    def __len__(self) -> int:
        return len(self._keys)

    def append(self, record: dict) -> None:
        missing = [f for f in RECORD_FIELDS if f not in record]
        if missing:
            raise ValueError(f"record lacks fields {missing}")
        key = record_key(record)
        with self._lock:
            if key in self._keys:
                raise DuplicateRecord(key)
            self.path.parent.mkdir(parents=True, exist_ok=True)
            line = json.dumps({f: record[f] for f in RECORD_FIELDS}, sort_keys=False) + "\n"
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
            self._keys.add(key)
