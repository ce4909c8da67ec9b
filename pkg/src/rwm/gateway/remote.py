"""Remote-LLM backend speaking the provider-neutral chat-completion shape.

One HTTP POST per invocation: a role prompt plus the JSON-encoded context,
asking for a single JSON object back. Provider specifics (auth header
names, base URLs) stay inside adapter configs; credentials come from the
environment only and are never persisted in run configuration.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any

import httpx

from ..errors import ConfigError, TransportError
from .base import AgentRequest

ROLE_PROMPTS = {
    "default": (
        "You are a {role} agent on a research team. Respond with a single "
        "JSON object matching the role's response schema; no prose."
    ),
}


@dataclass
class RemoteConfig:
    base_url: str
    model: str
    api_key_env: str = "RWM_API_KEY"
    timeout_s: float = 60.0
    temperature: float = 0.0

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "RemoteConfig":
        if "base_url" not in payload or "model" not in payload:
            raise ConfigError("remote backend config needs base_url and model")
        return cls(
            base_url=str(payload["base_url"]).rstrip("/"),
            model=str(payload["model"]),
            api_key_env=str(payload.get("api_key_env", "RWM_API_KEY")),
            timeout_s=float(payload.get("timeout_s", 60.0)),
            temperature=float(payload.get("temperature", 0.0)),
        )


class RemoteBackend:
    def __init__(self, config: RemoteConfig, client: httpx.Client | None = None):
        self.config = config
        self._client = client

    def build_request_body(self, request: AgentRequest) -> dict[str, Any]:
        prompt = ROLE_PROMPTS["default"].format(role=request.role.value)
        return {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": prompt},
                {"role": "user", "content": json.dumps(request.context, sort_keys=True, default=str)},
            ],
            "response_format": {"type": "json_object"},
        }

    def respond(self, request: AgentRequest) -> dict[str, Any]:
        api_key = os.environ.get(self.config.api_key_env)
        if not api_key:
            raise TransportError(
                f"remote backend needs credentials in ${self.config.api_key_env}")
        client = self._client or httpx.Client(timeout=self.config.timeout_s)
        try:
            response = client.post(
                f"{self.config.base_url}/chat/completions",
                headers={"Authorization": f"Bearer {api_key}"},
                json=self.build_request_body(request),
            )
            response.raise_for_status()
            body = response.json()
            content = body["choices"][0]["message"]["content"]
            return json.loads(content)
        except (httpx.HTTPError, KeyError, IndexError, json.JSONDecodeError) as exc:
            raise TransportError(f"remote invocation failed: {exc}") from exc
        finally:
            if self._client is None:
                client.close()
