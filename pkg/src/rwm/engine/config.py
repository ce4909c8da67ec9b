"""Run configuration: one JSON file fixes backends, protocol knobs, and
budget so a whole run is reproducible from a single artifact. Credentials
never appear here; remote backends read them from the environment."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import ConfigError
from ..gateway import (
    AgentGateway,
    GatewayConfig,
    RemoteBackend,
    RemoteConfig,
    ScriptedBackend,
    StochasticAgentConfig,
    StochasticBackend,
)


@dataclass
class RunConfig:
    default_backend: str = "scripted"
    role_backends: dict[str, str] = field(default_factory=dict)
    scripted_fixtures_path: str | None = None
    stochastic: dict[str, Any] = field(default_factory=dict)
    remote: dict[str, Any] | None = None
    agents_k: int = 3
    round_limit: int = 4
    t_max: int = 5
    top_k: int = 20
    max_venues: int = 12
    theta_dedup: float = 0.85
    tau_shared: int = 3
    max_calls: int = 2000
    max_tokens: int = 5_000_000
    parallelism: int = 4
    retry_backoff_s: float = 1.0  # exponential base; scripted test runs set 0
    non_interactive: bool = False
    max_review_cycles: int = 1
    seed: int = 7
    clock: str = "logical"  # "logical" for reproducible runs, "wall" otherwise

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "RunConfig":
        backends = payload.get("backends", {})
        consensus = payload.get("consensus", {})
        dev_loop = payload.get("dev_loop", {})
        ingestion = payload.get("ingestion", {})
        budget = payload.get("budget", {})
        config = cls(
            default_backend=backends.get("default", "scripted"),
            role_backends=dict(backends.get("roles", {})),
            scripted_fixtures_path=payload.get("scripted_fixtures_path"),
            stochastic=dict(payload.get("stochastic", {})),
            remote=payload.get("remote"),
            agents_k=int(consensus.get("agents", 3)),
            round_limit=int(consensus.get("round_limit", 4)),
            t_max=int(dev_loop.get("t_max", 5)),
            top_k=int(ingestion.get("top_k", 20)),
            max_venues=int(ingestion.get("max_venues", 12)),
            theta_dedup=float(payload.get("theta_dedup", 0.85)),
            tau_shared=int(payload.get("tau_shared", 3)),
            max_calls=int(budget.get("max_calls", 2000)),
            max_tokens=int(budget.get("max_tokens", 5_000_000)),
            parallelism=int(payload.get("parallelism", 4)),
            retry_backoff_s=float(payload.get("retry_backoff_s", 1.0)),
            non_interactive=bool(payload.get("non_interactive", False)),
            max_review_cycles=int(payload.get("max_review_cycles", 1)),
            seed=int(payload.get("seed", 7)),
            clock=str(payload.get("clock", "logical")),
        )
        if config.clock not in ("logical", "wall"):
            raise ConfigError(f"clock must be 'logical' or 'wall', got {config.clock!r}")
        if config.max_venues > 12:
            raise ConfigError("max_venues cannot exceed 12")
        if config.round_limit < 2:
            raise ConfigError("consensus round_limit must be at least 2")
        return config

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read run configuration {path}: {exc}") from exc
        return cls.from_dict(payload)


def build_gateway(config: RunConfig, fixtures_base: Path | None = None) -> AgentGateway:
    """Assemble the gateway named by the run configuration."""
    gateway = AgentGateway(config=GatewayConfig(
        default_backend=config.default_backend,
        role_backends=dict(config.role_backends),
        parallelism=config.parallelism,
        retry_backoff_s=config.retry_backoff_s,
    ))
    if config.scripted_fixtures_path:
        path = Path(config.scripted_fixtures_path)
        if fixtures_base is not None and not path.is_absolute():
            path = fixtures_base / path
        gateway.register_backend("scripted", ScriptedBackend.from_file(path))
    else:
        gateway.register_backend("scripted", ScriptedBackend())
    gateway.register_backend("stochastic", StochasticBackend(StochasticAgentConfig(
        hit_rate_p=float(config.stochastic.get("hit_rate_p", 0.3)),
        round2_hit_rate_p2=config.stochastic.get("round2_hit_rate_p2"),
        noise_rate=float(config.stochastic.get("noise_rate", 0.2)),
        seed=int(config.stochastic.get("seed", config.seed)),
    )))
    if config.remote:
        gateway.register_backend("remote", RemoteBackend(RemoteConfig.from_dict(config.remote)))
    return gateway
