"""Fixture-driven backend for deterministic runs and tests.

Responses are looked up by role, then by the request's fixture key:

    fixtures = {
        "venue_search": {"by_key": {"NeurIPS": {...}}, "default": {...}},
        "prober": {"queue": [{...}, {...}]},
    }

A ``by_key`` value may be a list, consumed FIFO across repeated requests
with the same key. Python callables can be registered per role for
programmable behavior (they receive the request context).
"""
from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any, Callable

from ..errors import TransportError
from .base import AgentRequest

Handler = Callable[[dict[str, Any]], dict[str, Any]]


class ScriptedBackend:
    def __init__(self, fixtures: dict[str, Any] | None = None,
                 handlers: dict[str, Handler] | None = None):
        self.fixtures = copy.deepcopy(fixtures or {})
        self.handlers: dict[str, Handler] = dict(handlers or {})
        self._queues: dict[tuple[str, str], list] = {}

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(fixtures=payload.get("roles", payload))

    def set_handler(self, role: str, handler: Handler) -> None:
        self.handlers[role] = handler

    def respond(self, request: AgentRequest) -> dict[str, Any]:
        role = request.role.value
        if role in self.handlers:
            return self.handlers[role](request.context)
        spec = self.fixtures.get(role)
        if spec is None:
            raise TransportError(f"no fixtures scripted for role {role}")
        key = request.fixture_key
        by_key = spec.get("by_key", {})
        if key in by_key:
            return self._take(("key", role + "\0" + key), by_key[key])
        if "queue" in spec:
            return self._take(("queue", role), spec["queue"])
        if "default" in spec:
            return copy.deepcopy(spec["default"])
        raise TransportError(f"no fixture for role {role} key {key!r}")

    def _take(self, slot: tuple[str, str], value: Any) -> dict[str, Any]:
        if not isinstance(value, list):
            return copy.deepcopy(value)
        queue = self._queues.setdefault(slot, list(value))
        if not queue:
            raise TransportError(f"fixture queue exhausted for {slot}")
        return copy.deepcopy(queue.pop(0))
