"""Seeded hit-rate backend for protocol simulation.

Models a probing agent that independently lands on each planted gap with
probability p in round 1 and p2 in round 2 (shared visibility raises the
hit rate), plus an agent-specific noise gap with probability noise_rate.
Behavior depends only on (seed, trial, agent, round, gap index), never on
thread scheduling, so whole simulations are bit-reproducible.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any

from ..canonical import derive_seed
from .base import AgentRequest


@dataclass
class StochasticAgentConfig:
    hit_rate_p: float = 0.3
    round2_hit_rate_p2: float | None = None  # defaults to hit_rate_p
    noise_rate: float = 0.2
    seed: int = 0

    def rate_for_round(self, round_no: int) -> float:
        if round_no >= 2 and self.round2_hit_rate_p2 is not None:
            return self.round2_hit_rate_p2
        return self.hit_rate_p


class StochasticBackend:
    def __init__(self, config: StochasticAgentConfig):
        self.config = config

    def respond(self, request: AgentRequest) -> dict[str, Any]:
        ctx = request.context
        round_no = int(ctx.get("round", 1))
        trial = ctx.get("trial", 0)
        agent = request.agent_id or ctx.get("agent_id", "agent")
        planted = list(ctx.get("planted_gaps", []))
        rate = self.config.rate_for_round(round_no)
        gaps = []
        for index, description in enumerate(planted):
            rng = random.Random(derive_seed(self.config.seed, trial, agent, round_no, index))
            if rng.random() < rate:
                gaps.append({
                    "description": description,
                    "gap_type": "methods",
                    "evidence": [],
                })
        noise_rng = random.Random(derive_seed(self.config.seed, trial, agent, round_no, "noise"))
        if noise_rng.random() < self.config.noise_rate:
            gaps.append({
                "description": f"spurious finding of {agent} round {round_no} trial {trial}",
                "gap_type": "methods",
                "evidence": [],
            })
        return {"gaps": gaps, "proposals": []}
