from __future__ import annotations

import pytest

from rwm.errors import DevLoopError, SchemaValidationError
from rwm.gateway import AgentGateway, GatewayConfig, ScriptedBackend, unlimited
from rwm.devloop import (
    GATE_CRITERIA,
    GateResult,
    LoopState,
    Mechanism,
    build_causal_chain,
    evaluate_gate,
    gate_result_from_evidence,
    map_fields,
    reassess,
    run_dev_loop,
    technique_key,
)
from rwm.worldmodel import Node, NodeKind, Relation, create_empty


def gateway_with(handlers: dict) -> AgentGateway:
    gw = AgentGateway(config=GatewayConfig(parallelism=1, retry_backoff_s=0.0))
    gw.register_backend("scripted", ScriptedBackend(handlers=handlers))
    return gw


@pytest.fixture
def gap_model():
    wm = create_empty()
    module = wm.add_node(Node.module(name="lagrange multiplier update", module_type="training"))
    bench = wm.add_node(Node.benchmark(name="shifting constraints suite"))
    gap = wm.add_node(Node.gap(description="safety methods degrade under distribution shift"))
    wm.verify(gap)
    return wm, gap, module, bench


def chain_payload(module: str, bench: str, mechanism="optimization under non-stationarity",
                  n_links=5) -> dict:
    links = [
        {"text": "safety methods degrade", "anchors": [bench]},
        {"text": "lagrangian methods fail when constraints move", "anchors": [bench]},
        {"text": "the multiplier update assumes stationarity", "anchors": [module]},
        {"text": "a static operating point cannot track a moving boundary", "anchors": [module]},
        {"text": mechanism, "anchors": [module]},
    ]
    return {"links": links[:n_links], "origin_field": "safe reinforcement learning"}


def all_pass_evidence() -> dict:
    return {k: {"passed": True, "evidence": f"evidence for {k}"} for k in GATE_CRITERIA}


def test_chain_ends_in_mechanism(gap_model):
    wm, gap, module, bench = gap_model
    gw = gateway_with({"mechanism_analyst": lambda ctx: chain_payload(module, bench)})
    chain, mechanism = build_causal_chain(gap, wm, gw, unlimited())
    assert len(chain.links) == 5
    assert mechanism.statement == "optimization under non-stationarity"
    assert mechanism.origin_field == "safe reinforcement learning"


def test_unverified_gap_rejected(gap_model):
    wm, _, module, bench = gap_model
    unverified = wm.add_node(Node.gap(description="some unverified hunch"))
    gw = gateway_with({"mechanism_analyst": lambda ctx: chain_payload(module, bench)})
    with pytest.raises(DevLoopError):
        build_causal_chain(unverified, wm, gw, unlimited())


def test_four_link_chain_is_schema_error(gap_model):
    wm, gap, module, bench = gap_model
    gw = gateway_with({"mechanism_analyst": lambda ctx: chain_payload(module, bench, n_links=4)})
    with pytest.raises(SchemaValidationError):
        build_causal_chain(gap, wm, gw, unlimited())


def test_unanchored_link_rejected_after_retry(gap_model):
    wm, gap, module, bench = gap_model
    attempts = []

    def dangling(ctx):
        attempts.append(ctx.get("repair_hint"))
        payload = chain_payload(module, bench)
        payload["links"][2]["anchors"] = ["module:ghost"]
        return payload

    gw = gateway_with({"mechanism_analyst": dangling})
    with pytest.raises(DevLoopError):
        build_causal_chain(gap, wm, gw, unlimited())
    assert len(attempts) == 2
    assert "module:ghost" in str(attempts[1])


def test_dangling_anchor_repaired_on_second_attempt(gap_model):
    wm, gap, module, bench = gap_model
    attempts = []

    def flaky(ctx):
        attempts.append(1)
        payload = chain_payload(module, bench)
        if len(attempts) == 1:
            payload["links"][2]["anchors"] = ["module:ghost"]
        return payload

    gw = gateway_with({"mechanism_analyst": flaky})
    chain, _ = build_causal_chain(gap, wm, gw, unlimited())
    assert len(attempts) == 2
    assert len(chain.links) == 5


def test_map_fields_excludes_origin():
    mechanism = Mechanism(statement="optimization under non-stationarity",
                          origin_field="safe reinforcement learning")
    gw = gateway_with({"field_mapper": lambda ctx: {"fields": [
        {"name": "online convex optimization", "query": "regret bounds under concept drift"},
        {"name": "robust control", "query": "stability under parameter drift"},
        {"name": "Safe Reinforcement Learning", "query": "should be filtered"},
    ]}})
    field_set = map_fields(mechanism, gw, unlimited())
    assert field_set.names() == ["online convex optimization", "robust control"]
    assert field_set.fields[0].query == "regret bounds under concept drift"


def test_map_fields_origin_only_is_error():
    mechanism = Mechanism(statement="m", origin_field="safe reinforcement learning")
    gw = gateway_with({"field_mapper": lambda ctx: {"fields": [
        {"name": "safe reinforcement learning", "query": "q"},
    ]}})
    with pytest.raises(DevLoopError):
        map_fields(mechanism, gw, unlimited())


def test_gate_all_pass():
    result = evaluate_gate({"name": "m"}, evidence=all_pass_evidence())
    assert result.passed is True


def test_gate_single_failure_blocks():
    evidence = all_pass_evidence()
    evidence["performance_significance"] = {
        "passed": False, "evidence": "p = 0.03 over 2 seeds"}
    result = evaluate_gate({"name": "m"}, evidence=evidence)
    assert result.passed is False
    assert result.failing() == ["performance_significance"]


@pytest.mark.parametrize("criterion", sorted(GATE_CRITERIA))
def test_gate_every_single_flip_fails(criterion):
    evidence = all_pass_evidence()
    evidence[criterion] = {"passed": False, "evidence": "does not hold"}
    assert evaluate_gate({"name": "m"}, evidence=evidence).passed is False


def test_gate_missing_criterion_evidence():
    evidence = all_pass_evidence()
    del evidence["compute_honest"]
    with pytest.raises(DevLoopError):
        evaluate_gate({"name": "m"}, evidence=evidence)


def test_gate_via_agent():
    gw = gateway_with({"gate_evaluator": lambda ctx: {"criteria": all_pass_evidence()}})
    result = evaluate_gate({"name": "m"}, gateway=gw, budget=unlimited())
    assert result.passed


def failing_gate() -> GateResult:
    evidence = all_pass_evidence()
    evidence["novelty_insight"] = {"passed": False, "evidence": "incremental"}
    return gate_result_from_evidence(evidence)


@pytest.mark.parametrize("branch", ["update_mechanism", "update_fields", "update_gap"])
def test_reassess_branches(branch):
    gw = gateway_with({"reassessor": lambda ctx: {"branch": branch, "rationale": "scripted"}})
    state = LoopState(iteration=1)
    assert reassess(state, failing_gate(), gw, unlimited()) == branch
    assert state.reassess_history == [
        {"iteration": 1, "branch": branch, "rationale": "scripted"}]


def test_reassess_on_passed_gate_is_error():
    gw = gateway_with({"reassessor": lambda ctx: {"branch": "update_gap"}})
    passed = gate_result_from_evidence(all_pass_evidence())
    with pytest.raises(DevLoopError):
        reassess(LoopState(), passed, gw, unlimited())


def loop_handlers(gap_module_bench, gate_behavior, techniques=None,
                  mechanism_confirmed=True):
    """Standard scripted team for loop tests."""
    module, bench = gap_module_bench
    counter = {"search": 0}
    technique_list = techniques or [
        {"field": "online convex optimization", "name": f"technique {i}"}
        for i in range(10)]

    def searcher(ctx):
        i = counter["search"]
        counter["search"] += 1
        return {"techniques": [technique_list[i % len(technique_list)]]}

    def tester(ctx):
        return {
            "mechanism_confirmed": mechanism_confirmed,
            "method": {"name": f"candidate using {ctx['technique']['name']}",
                       "description": "adapted technique"},
        }

    def gate(ctx):
        evidence = all_pass_evidence()
        if not gate_behavior(ctx):
            evidence["performance_baselines"] = {
                "passed": False, "evidence": "only one baseline beaten"}
        return {"criteria": evidence}

    return {
        "mechanism_analyst": lambda ctx: chain_payload(module, bench),
        "field_mapper": lambda ctx: {"fields": [
            {"name": "online convex optimization", "query": "regret under drift"}]},
        "searcher": searcher,
        "tester": tester,
        "gate_evaluator": gate,
        "reassessor": lambda ctx: {"branch": "update_fields", "rationale": "scripted"},
    }


def test_loop_finalizes_on_first_pass(gap_model):
    wm, gap, module, bench = gap_model
    gw = gateway_with(loop_handlers((module, bench), lambda ctx: True))
    outcome = run_dev_loop(gap, wm, gw, unlimited(), t_max=5)
    assert outcome.finalized is True
    assert outcome.iterations == 1
    method_id = [n.id for n in wm.nodes_of_kind(NodeKind.METHOD)][0]
    solves = [e for e in wm.edges.values() if e.relation is Relation.SOLVES]
    assert len(solves) == 1
    assert wm.uncertainty_of(method_id) == 0
    assert wm.uncertainty_of(solves[0].id) == 0


def test_loop_always_failing_gate_stops_at_t_max(gap_model):
    wm, gap, module, bench = gap_model
    gw = gateway_with(loop_handlers((module, bench), lambda ctx: False))
    outcome = run_dev_loop(gap, wm, gw, unlimited(), t_max=5)
    assert outcome.finalized is False
    assert outcome.iterations == 5
    assert len(outcome.gate_results) == 5
    assert len(outcome.loop_state.reassess_history) == 5


def test_loop_skips_already_searched_pairs(gap_model):
    wm, gap, module, bench = gap_model
    # searcher always returns the same technique first, a fresh one second
    offers = [
        [{"field": "f", "name": "repeat me"}],
        [{"field": "f", "name": "repeat me"}, {"field": "f", "name": "fresh"}],
    ]
    calls = {"n": 0}

    def searcher(ctx):
        payload = offers[min(calls["n"], 1)]
        calls["n"] += 1
        return {"techniques": payload}

    handlers = loop_handlers((module, bench), lambda ctx: False)
    handlers["searcher"] = searcher
    gw = gateway_with(handlers)
    outcome = run_dev_loop(gap, wm, gw, unlimited(), t_max=2)
    searched = outcome.loop_state.searched
    assert technique_key("f", "repeat me") in searched
    assert technique_key("f", "fresh") in searched
    assert len(searched) == 2  # no duplicates ever recorded
    skips = [e for e in outcome.transcript if e["type"] == "technique.skipped"]
    assert len(skips) == 1


def test_loop_frontier_exhaustion_forces_field_update(gap_model):
    wm, gap, module, bench = gap_model
    handlers = loop_handlers((module, bench), lambda ctx: False,
                             techniques=[{"field": "f", "name": "only one"}])
    handlers["searcher"] = lambda ctx: {"techniques": [{"field": "f", "name": "only one"}]}
    gw = gateway_with(handlers)
    outcome = run_dev_loop(gap, wm, gw, unlimited(), t_max=3)
    assert outcome.iterations == 3
    branches = [h["branch"] for h in outcome.loop_state.reassess_history]
    assert "update_fields" in branches
    assert len(outcome.loop_state.searched) == 1


def test_loop_mechanism_failure_forces_mechanism_update(gap_model):
    wm, gap, module, bench = gap_model
    handlers = loop_handlers((module, bench), lambda ctx: True, mechanism_confirmed=False)
    gw = gateway_with(handlers)
    outcome = run_dev_loop(gap, wm, gw, unlimited(), t_max=2)
    assert outcome.finalized is False
    assert all(h["branch"] == "update_mechanism" for h in outcome.loop_state.reassess_history)
    assert outcome.gate_results == []  # gate never reached


def test_loop_commits_exactly_one_delta_per_iteration(gap_model):
    wm, gap, module, bench = gap_model
    gw = gateway_with(loop_handlers((module, bench), lambda ctx: False))
    outcome = run_dev_loop(gap, wm, gw, unlimited(), t_max=4)
    sources = [record["source"]
               for records in wm.provenance.values()
               for record in records
               if record.get("source", "").startswith("iteration-")]
    assert sorted(set(sources)) == [f"iteration-{t}" for t in range(1, 5)]


def test_loop_unverified_gap_precondition(gap_model):
    wm, _, module, bench = gap_model
    unverified = wm.add_node(Node.gap(description="hunch"))
    gw = gateway_with(loop_handlers((module, bench), lambda ctx: True))
    with pytest.raises(DevLoopError):
        run_dev_loop(unverified, wm, gw, unlimited(), t_max=2)


def test_loop_growth_is_monotone(gap_model):
    wm, gap, module, bench = gap_model
    gw = gateway_with(loop_handlers((module, bench), lambda ctx: False))
    counts = [wm.node_count()]

    def watch(event):
        counts.append(wm.node_count())

    run_dev_loop(gap, wm, gw, unlimited(), t_max=5, sink=watch)
    assert counts == sorted(counts)
