"""Append-only JSON-lines event log per project.

One event per committed engine action, with a strictly increasing sequence
number. The log is both the durable transcript and the source for the SSE
stream; reopening derives the next sequence number from the file tail so
resumed projects never reuse or skip numbers.
"""
from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Callable


class EventLog:
    def __init__(self, path: str | Path, project_id: str, clock: Callable[[], str]):
        self.path = Path(path)
        self.project_id = project_id
        self._clock = clock
        self._lock = threading.Lock()
        self._next_seq = self._scan_next_seq()

    def _scan_next_seq(self) -> int:
        if not self.path.exists():
            return 1
        last = 0
        with self.path.open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    last = json.loads(line)["seq"]
        return last + 1

    def append(self, event_type: str, payload: dict[str, Any] | None = None) -> dict[str, Any]:
        with self._lock:
            event = {
                "seq": self._next_seq,
                "ts": self._clock(),
                "project": self.project_id,
                "type": event_type,
                "payload": payload or {},
            }
            self._next_seq += 1
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(event, sort_keys=True, ensure_ascii=True) + "\n")
            return event

    def read_all(self) -> list[dict[str, Any]]:
        return self.read_after(0)

    def read_after(self, seq: int) -> list[dict[str, Any]]:
        if not self.path.exists():
            return []
        events = []
        with self.path.open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                if event["seq"] > seq:
                    events.append(event)
        return events

    @property
    def last_seq(self) -> int:
        return self._next_seq - 1
