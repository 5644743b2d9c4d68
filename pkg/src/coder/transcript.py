"""Append-only JSONL event log for agent sessions.

One object per line: ``{seq, ts, kind, payload}`` plus ``usage`` on model
turns. ``seq`` is strictly increasing from 0; ``ts`` is RFC 3339. Timestamps
are recorded but excluded from determinism comparisons, so parsing returns
events without them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable

from .errors import CoderError

EVENT_KINDS = ("model_turn", "tool_call", "tool_result", "outcome")


class TranscriptError(CoderError):
    """Transcript I/O failed; the session is aborted."""


@dataclass(frozen=True)
class TranscriptEvent:
    kind: str
    payload: dict
    usage: dict | None = None

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class TranscriptWriter:
    """Writes events incrementally; buffered, flushed on close."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._seq = 0
        self._fh: IO[str] | None = None
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self.path.open("w", encoding="utf-8")
        except OSError as exc:
            raise TranscriptError(f"cannot open transcript {self.path}: {exc}") from exc

    def append(self, event: TranscriptEvent) -> None:
        record: dict = {
            "seq": self._seq,
            "ts": _now(),
            "kind": event.kind,
            "payload": event.payload,
        }
        if event.usage is not None:
            record["usage"] = event.usage
        try:
            assert self._fh is not None
            self._fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        except OSError as exc:
            raise TranscriptError(f"cannot write transcript {self.path}: {exc}") from exc
        self._seq += 1

    def close(self) -> None:
        if self._fh is not None:
            try:
                self._fh.flush()
                self._fh.close()
            except OSError as exc:
                raise TranscriptError(f"cannot flush transcript {self.path}: {exc}") from exc
            finally:
                self._fh = None


def persist_transcript(events: Iterable[TranscriptEvent], path: Path | str) -> Path:
    """Write a complete event sequence to ``path``; returns the path."""
    writer = TranscriptWriter(path)
    try:
        for event in events:
            writer.append(event)
    finally:
        writer.close()
    return Path(path)


def read_raw(path: Path | str) -> list[dict]:
    """Raw records including seq and ts, validated for strict seq ordering."""
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    for i, rec in enumerate(records):
        if rec.get("seq") != i:
            raise TranscriptError(f"bad sequence number at line {i}: {rec.get('seq')}")
    return records


def parse_transcript(path: Path | str) -> list[TranscriptEvent]:
    """The comparison form of a transcript: events without seq/ts."""
    return [
        TranscriptEvent(rec["kind"], rec["payload"], rec.get("usage"))
        for rec in read_raw(path)
    ]
