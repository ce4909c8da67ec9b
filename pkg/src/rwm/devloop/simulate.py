"""Fuzzed adversarial runs of the development loop.

Each run wires randomly misbehaving scripted agents (failing gates, shaky
mechanism confirmations, searchers that keep re-offering old techniques,
arbitrary reassessment branches) and audits the two load-bearing loop
guarantees: iteration count never exceeds the cap, and no (field,
technique) pair is ever searched twice.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any

from ..canonical import derive_seed
from ..gateway import AgentGateway, GatewayConfig, ScriptedBackend, unlimited
from ..worldmodel import Node, WorldModel
from .gate import GATE_CRITERIA
from .loop import run_dev_loop


@dataclass
class LoopFuzzResult:
    runs: int
    t_max: int
    max_iterations: int
    finalized_runs: int
    duplicate_search_events: int
    total_searched_pairs: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "runs": self.runs,
            "t_max": self.t_max,
            "max_iterations": self.max_iterations,
            "finalized_runs": self.finalized_runs,
            "duplicate_search_events": self.duplicate_search_events,
            "total_searched_pairs": self.total_searched_pairs,
        }


def _adversarial_handlers(rng: random.Random, module_id: str, bench_id: str,
                          pass_probability: float) -> dict[str, Any]:
    fields_pool = ["online convex optimization", "robust control",
                   "financial mathematics", "signal processing"]
    technique_pool = [f"technique {i}" for i in range(6)]

    def analyst(ctx):
        return {
            "links": [
                {"text": f"cause {i}", "anchors": [module_id if i % 2 else bench_id]}
                for i in range(4)
            ] + [{"text": "abstract mechanism", "anchors": [module_id]}],
            "origin_field": "origin domain",
        }

    def mapper(ctx):
        count = rng.randint(1, 3)
        picks = rng.sample(fields_pool, count)
        return {"fields": [{"name": f, "query": f"query in {f}"} for f in picks]}

    def searcher(ctx):
        count = rng.randint(0, 3)
        return {"techniques": [
            {"field": ctx["field"], "name": rng.choice(technique_pool)}
            for _ in range(count)
        ]}

    def tester(ctx):
        return {
            "mechanism_confirmed": rng.random() < 0.8,
            "method": {"name": f"candidate {rng.randrange(10**6)}"},
        }

    def gate(ctx):
        passed = rng.random() < pass_probability
        criteria = {}
        for criterion in GATE_CRITERIA:
            ok = True if passed else rng.random() < 0.7
            criteria[criterion] = {"passed": ok, "evidence": "fuzzed"}
        if not passed:
            # guarantee at least one failure so Q stays 0
            criteria["performance_baselines"] = {"passed": False, "evidence": "fuzzed"}
        return {"criteria": criteria}

    def reassessor(ctx):
        return {"branch": rng.choice(["update_mechanism", "update_fields", "update_gap"]),
                "rationale": "fuzzed"}

    return {
        "mechanism_analyst": analyst,
        "field_mapper": mapper,
        "searcher": searcher,
        "tester": tester,
        "gate_evaluator": gate,
        "reassessor": reassessor,
    }


def fuzz_dev_loops(runs: int, t_max: int = 5, seed: int = 7,
                   pass_probability: float = 0.0) -> LoopFuzzResult:
    max_iterations = 0
    finalized = 0
    duplicates = 0
    searched_total = 0
    for run in range(runs):
        rng = random.Random(derive_seed(seed, run))
        wm = WorldModel.empty()
        module_id = wm.add_node(Node.module(name="target module", module_type="training"))
        bench_id = wm.add_node(Node.benchmark(name="target bench"))
        gap_id = wm.add_node(Node.gap(description="fuzzed gap"))
        wm.verify(gap_id)

        gateway = AgentGateway(config=GatewayConfig(parallelism=1, retry_backoff_s=0.0))
        gateway.register_backend("scripted", ScriptedBackend(
            handlers=_adversarial_handlers(rng, module_id, bench_id, pass_probability)))
        outcome = run_dev_loop(gap_id, wm, gateway, unlimited(), t_max=t_max)

        max_iterations = max(max_iterations, outcome.iterations)
        if outcome.finalized:
            finalized += 1
        search_events = [e["type"] for e in outcome.transcript
                         if e["type"] == "technique.searched"]
        if len(search_events) != len(outcome.loop_state.searched):
            duplicates += len(search_events) - len(outcome.loop_state.searched)
        searched_total += len(outcome.loop_state.searched)
    return LoopFuzzResult(
        runs=runs,
        t_max=t_max,
        max_iterations=max_iterations,
        finalized_runs=finalized,
        duplicate_search_events=duplicates,
        total_searched_pairs=searched_total,
    )
