"""Request/response records and the backend interface."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Protocol

from .budget import Budget
from .roles import AgentRole


def estimate_tokens(payload: Any) -> int:
    """Crude but deterministic: one token per four serialized characters."""
    return max(1, len(json.dumps(payload, sort_keys=True, default=str)) // 4)


@dataclass
class AgentRequest:
    role: AgentRole
    context: dict[str, Any]
    budget: Budget
    agent_id: str = ""

    @property
    def fixture_key(self) -> str:
        return str(self.context.get("fixture_key", "*"))


@dataclass
class AgentResponse:
    role: AgentRole
    payload: dict[str, Any]
    attempts: int = 1
    tokens: int = 0
    backend: str = ""


class Backend(Protocol):
    def respond(self, request: AgentRequest) -> dict[str, Any]:
        """Produce a raw response payload; raise TransportError on failure."""
        ...
