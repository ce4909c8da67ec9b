"""Seeded Monte-Carlo simulation of the probing protocol.

Each trial runs one real round pair (stochastic probers, shared-visibility
round 2, corroboration, orchestration) against a planted ground-truth gap.
Recall counts trials where at least one agent independently generated the
planted gap in round 1, the event behind the 1-(1-p)^K analysis for K
independent agents. The simulated orchestrator keeps a gap only when its
round-2 multiplicity reaches a support quorum that scales with team size
(ceil(K/2), minimum 2 for K >= 2), so larger teams keep fewer, better
corroborated gaps; precision is the aligned fraction of kept gaps.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from ..canonical import normalize_text
from ..gateway import (
    AgentGateway,
    Budget,
    GatewayConfig,
    ScriptedBackend,
    StochasticAgentConfig,
    StochasticBackend,
)
from ..worldmodel import WorldModel
from .protocol import corroborate, orchestrate, run_round1, run_round2
from .types import PROBE_PERSPECTIVES, AgentSpec

PLANTED_GAP = "planted ground-truth gap"


def support_quorum(k_agents: int) -> int:
    if k_agents <= 1:
        return 1
    return max(2, math.ceil(k_agents / 2))


def quorum_orchestrator_handler(context: dict[str, Any]) -> dict[str, Any]:
    """Deterministic routing policy: keep quorum-backed gaps, kill the rest
    and all tasks. Stands in for an LLM orchestrator during simulation."""
    quorum = int(context.get("quorum", 2))
    decisions = []
    for gap in context.get("gaps", []):
        action = "continue" if gap["multiplicity"] >= quorum else "kill"
        decisions.append({
            "action": action,
            "subject": gap["key"],
            "rationale": f"multiplicity {gap['multiplicity']} vs quorum {quorum}",
        })
    for task in context.get("proposals", []):
        decisions.append({"action": "kill", "subject": task["task_id"],
                          "rationale": "simulation runs a single cycle"})
    return {"decisions": decisions}


@dataclass
class SimulationResult:
    k_agents: int
    hit_rate: float
    round2_hit_rate: float
    trials: int
    recall: float
    precision: float
    mean_surviving: float
    mean_round1_size: float
    mean_round2_size: float

    def csv_row(self) -> list[Any]:
        return [self.k_agents, self.hit_rate, self.round2_hit_rate, self.trials,
                f"{self.recall:.4f}", f"{self.precision:.4f}",
                f"{self.mean_surviving:.4f}"]


CSV_HEADER = ["agents", "hit_rate", "round2_hit_rate", "trials",
              "recall", "precision", "mean_surviving"]


def simulate_consensus(k_agents: int, hit_rate: float, trials: int, seed: int = 7,
                       round2_hit_rate: float | None = None,
                       noise_rate: float = 0.2) -> SimulationResult:
    if k_agents < 1 or trials < 1:
        raise ValueError("need at least one agent and one trial")
    p2 = hit_rate if round2_hit_rate is None else round2_hit_rate
    config = StochasticAgentConfig(hit_rate_p=hit_rate, round2_hit_rate_p2=p2,
                                   noise_rate=noise_rate, seed=seed)
    gateway = AgentGateway(config=GatewayConfig(parallelism=1, retry_backoff_s=0.0))
    gateway.register_backend("scripted", StochasticBackend(config))
    gateway.register_backend("policy", ScriptedBackend(
        handlers={"orchestrator": quorum_orchestrator_handler}))
    gateway.config.role_backends["orchestrator"] = "policy"

    agents = [AgentSpec(agent_id=f"prober-{i}",
                        perspective=PROBE_PERSPECTIVES[i % len(PROBE_PERSPECTIVES)])
              for i in range(k_agents)]
    orchestrator = AgentSpec(agent_id="orchestrator")
    budget = Budget(max_calls=10**9, max_tokens=10**12)
    snapshot = WorldModel.empty().snapshot()
    planted_key = normalize_text(PLANTED_GAP)
    quorum = support_quorum(k_agents)

    hits = 0
    surviving_total = 0
    surviving_aligned = 0
    round1_size_total = 0
    round2_size_total = 0
    for trial in range(trials):
        extra = {"planted_gaps": [PLANTED_GAP], "trial": trial, "quorum": quorum}
        round1_sets = run_round1(agents, snapshot, gateway, budget, extra_context=extra)
        union = [c for cs in round1_sets for c in cs]
        round1_size_total += len(union)
        if any(c.canonical_key == planted_key for c in union):
            hits += 1
        round2 = run_round2(agents, snapshot, union, gateway, budget, extra_context=extra)
        round2_size_total += sum(len(g) for g, _ in round2)
        corroborated = corroborate([g for g, _ in round2])
        proposals = [p for _, ps in round2 for p in ps]
        surviving, _, _ = orchestrate(corroborated, proposals, orchestrator,
                                      gateway, budget, extra_context={"quorum": quorum})
        surviving_total += len(surviving)
        surviving_aligned += sum(1 for g in surviving if g.key == planted_key)

    return SimulationResult(
        k_agents=k_agents,
        hit_rate=hit_rate,
        round2_hit_rate=p2,
        trials=trials,
        recall=hits / trials,
        precision=surviving_aligned / surviving_total if surviving_total else 0.0,
        mean_surviving=surviving_total / trials,
        mean_round1_size=round1_size_total / (trials * k_agents),
        mean_round2_size=round2_size_total / (trials * k_agents),
    )


def write_simulation_csv(results: Sequence[SimulationResult],
                         destination: str | Path) -> None:
    with open(destination, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for result in results:
            writer.writerow(result.csv_row())
