"""Uniform invocation layer over pluggable backends.

Per-role routing, schema gating, bounded retries with a repair hint, budget
reserve/commit, and concurrent fan-out under a parallelism cap. Every
invocation and failure is reported to an optional recorder callback, which
instruments ordering-sensitive tests (the consensus barrier) and feeds the
engine transcript.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from ..errors import (
    BudgetExceededError,
    DuplicateBackendError,
    GatewayError,
    SchemaValidationError,
    TransportError,
)
from .base import AgentRequest, AgentResponse, Backend, estimate_tokens
from .roles import AgentRole, validate_response

MAX_ATTEMPTS = 3

Recorder = Callable[[dict[str, Any]], None]


@dataclass
class GatewayConfig:
    default_backend: str = "scripted"
    role_backends: dict[str, str] = field(default_factory=dict)
    parallelism: int = 4
    retry_backoff_s: float = 1.0


class AgentGateway:
    def __init__(self, config: GatewayConfig | None = None,
                 recorder: Recorder | None = None):
        self.config = config or GatewayConfig()
        self._backends: dict[str, Backend] = {}
        self._recorder = recorder
        self.failures: list[dict[str, Any]] = []

    # -- backend registry ----------------------------------------------------

    def register_backend(self, name: str, backend: Backend) -> None:
        if name in self._backends:
            raise DuplicateBackendError(f"backend {name!r} already registered")
        self._backends[name] = backend

    def backend_for(self, role: AgentRole) -> tuple[str, Backend]:
        name = self.config.role_backends.get(role.value, self.config.default_backend)
        try:
            return name, self._backends[name]
        except KeyError:
            raise GatewayError(f"no backend {name!r} registered for role {role.value}") from None

    # -- invocation ------------------------------------------------------------

    def invoke(self, request: AgentRequest) -> AgentResponse:
        backend_name, backend = self.backend_for(request.role)
        request_tokens = estimate_tokens(request.context)
        from .budget import DEFAULT_RESPONSE_TOKEN_ESTIMATE

        reservation = request.budget.reserve(request_tokens + DEFAULT_RESPONSE_TOKEN_ESTIMATE)
        self._record({"event": "invocation.started", "role": request.role.value,
                      "agent": request.agent_id, "backend": backend_name})
        last_error: Exception | None = None
        payload = None
        attempts = 0
        for attempt in range(1, MAX_ATTEMPTS + 1):
            attempts = attempt
            try:
                context = dict(request.context)
                if attempt > 1:
                    context["repair_hint"] = (
                        f"attempt {attempt}: previous response failed with {last_error}")
                payload = backend.respond(AgentRequest(
                    role=request.role, context=context,
                    budget=request.budget, agent_id=request.agent_id))
                validate_response(request.role, payload)
                break
            except (TransportError, SchemaValidationError) as exc:
                last_error = exc
                payload = None
                self._note_failure(request, backend_name, attempt, exc)
                if attempt < MAX_ATTEMPTS and self.config.retry_backoff_s > 0:
                    time.sleep(self.config.retry_backoff_s * (2 ** (attempt - 1)))
        if payload is None:
            reservation.cancel()
            self._record({"event": "invocation.failed", "role": request.role.value,
                          "agent": request.agent_id, "error": str(last_error)})
            raise last_error  # TransportError or SchemaValidationError
        actual = request_tokens + estimate_tokens(payload)
        try:
            reservation.commit(actual)
        except BudgetExceededError:
            self._record({"event": "invocation.refused", "role": request.role.value,
                          "agent": request.agent_id, "reason": "token budget"})
            raise
        self._record({"event": "invocation.completed", "role": request.role.value,
                      "agent": request.agent_id, "attempts": attempts, "tokens": actual})
        return AgentResponse(role=request.role, payload=payload, attempts=attempts,
                             tokens=actual, backend=backend_name)

    def invoke_all(self, requests: Sequence[AgentRequest],
                   parallelism: int | None = None) -> list[AgentResponse | Exception]:
        """Fan out concurrently up to the cap; results keep input order and
        per-request failures come back as exception objects."""
        cap = max(1, parallelism if parallelism is not None else self.config.parallelism)
        if cap == 1 or len(requests) <= 1:
            return [self._invoke_catching(r) for r in requests]
        with ThreadPoolExecutor(max_workers=cap) as pool:
            return list(pool.map(self._invoke_catching, requests))

    def _invoke_catching(self, request: AgentRequest) -> AgentResponse | Exception:
        try:
            return self.invoke(request)
        except GatewayError as exc:
            return exc

    # -- bookkeeping -----------------------------------------------------------

    def _note_failure(self, request: AgentRequest, backend: str,
                      attempt: int, error: Exception) -> None:
        self.failures.append({
            "role": request.role.value,
            "agent": request.agent_id,
            "backend": backend,
            "attempt": attempt,
            "error": str(error),
        })
        self._record({"event": "invocation.retry", "role": request.role.value,
                      "agent": request.agent_id, "attempt": attempt, "error": str(error)})

    def _record(self, event: dict[str, Any]) -> None:
        if self._recorder is not None:
            self._recorder(event)
