"""The self-correcting development loop.

Each iteration runs a full cycle: causal chain, field mapping, cross-domain
search, mechanism-checked testing, and the quality gate. Failure routes to
direction reassessment (mechanism, fields, or gap), never to blind deeper
search. The loop state carries every searched (field, technique) pair so
no pair is ever tried twice, and exactly one world model delta commits per
iteration. Termination is by gate pass or the iteration cap.
"""
from __future__ import annotations

from typing import Any, Callable

from ..errors import DevLoopError
from ..gateway import AgentGateway, AgentRequest, AgentRole, Budget
from ..worldmodel import Delta, Edge, Node, ProvenanceStamp, Relation, WorldModel
from .analysis import build_causal_chain, map_fields
from .gate import evaluate_gate, gate_result_from_evidence, GATE_CRITERIA
from .types import (
    CausalChain,
    DevOutcome,
    FieldSet,
    GateResult,
    LoopState,
    Mechanism,
    technique_key,
)

DEFAULT_T_MAX = 5
REASSESS_BRANCHES = ("update_mechanism", "update_fields", "update_gap")

EventSink = Callable[[dict[str, Any]], None]


def reassess(loop_state: LoopState, gate_result: GateResult,
             gateway: AgentGateway, budget: Budget, *,
             context: dict[str, Any] | None = None) -> str:
    """Pick exactly one reassessment branch for a failed gate."""
    if gate_result.passed:
        raise DevLoopError("reassess applies only to failed gates")
    response = gateway.invoke(AgentRequest(
        role=AgentRole.REASSESSOR,
        context={
            "fixture_key": f"t{loop_state.iteration}",
            "failing_criteria": gate_result.failing(),
            "history": list(loop_state.reassess_history),
            **(context or {}),
        },
        budget=budget,
    ))
    branch = response.payload["branch"]
    loop_state.reassess_history.append({
        "iteration": loop_state.iteration,
        "branch": branch,
        "rationale": response.payload.get("rationale", ""),
    })
    return branch


def run_dev_loop(gap_id: str, wm: WorldModel, gateway: AgentGateway, budget: Budget, *,
                 t_max: int = DEFAULT_T_MAX, stamp: ProvenanceStamp | None = None,
                 sink: EventSink | None = None) -> DevOutcome:
    if t_max < 1:
        raise DevLoopError("t_max must be at least 1")
    state = LoopState()
    transcript: list[dict[str, Any]] = []
    gate_results: list[GateResult] = []

    def emit(event: dict[str, Any]) -> None:
        transcript.append(event)
        if sink is not None:
            sink(event)

    chain: CausalChain | None = None
    mechanism: Mechanism | None = None
    fields: FieldSet | None = None
    finalized_method: dict[str, Any] | None = None

    while state.iteration < t_max and finalized_method is None:
        state.iteration += 1
        t = state.iteration
        emit({"type": "iteration.started", "t": t})

        if chain is None or mechanism is None:
            chain, mechanism = build_causal_chain(
                gap_id, wm, gateway, budget, iteration=t,
                history=state.reassess_history)
            fields = None
            emit({"type": "chain.built", "t": t,
                  "mechanism": mechanism.statement,
                  "origin_field": mechanism.origin_field})
        if fields is None:
            fields = map_fields(mechanism, gateway, budget, iteration=t,
                                history=state.reassess_history)
            emit({"type": "fields.mapped", "t": t, "fields": fields.names()})

        technique = _search_new_technique(gap_id, fields, state, gateway, budget, t, emit)
        if technique is None:
            # frontier exhausted for the current field set: no search step ran
            state.reassess_history.append({
                "iteration": t, "branch": "update_fields",
                "rationale": "every candidate (field, technique) pair was already searched",
            })
            emit({"type": "reassess", "t": t, "branch": "update_fields",
                  "forced": "frontier exhausted"})
            fields = None
            _commit_iteration(wm, gap_id, None, t, stamp)
            continue

        test_payload = gateway.invoke(AgentRequest(
            role=AgentRole.TESTER,
            context={
                "fixture_key": f"{technique['field']}::{technique['name']}",
                "gap_id": gap_id,
                "mechanism": mechanism.statement,
                "technique": technique,
                "iteration": t,
            },
            budget=budget,
        )).payload
        method_record = dict(test_payload["method"])
        method_record.setdefault("technique", technique["name"])
        method_record.setdefault("field", technique["field"])
        state.tested_methods.append({
            "method": method_record,
            "mechanism_confirmed": test_payload["mechanism_confirmed"],
            "iteration": t,
        })
        emit({"type": "technique.tested", "t": t, "technique": technique,
              "mechanism_confirmed": test_payload["mechanism_confirmed"]})

        if not test_payload["mechanism_confirmed"]:
            # prediction failed before any full build: the mechanism is wrong
            state.reassess_history.append({
                "iteration": t, "branch": "update_mechanism",
                "rationale": "mechanism prediction failed during testing",
            })
            emit({"type": "reassess", "t": t, "branch": "update_mechanism",
                  "forced": "mechanism check"})
            chain = mechanism = fields = None
            _commit_iteration(wm, gap_id, method_record, t, stamp)
            continue

        evidence = test_payload.get("evidence")
        if evidence and set(evidence) >= set(GATE_CRITERIA):
            gate = gate_result_from_evidence(evidence)
        else:
            gate = evaluate_gate(method_record, gateway=gateway, budget=budget)
        gate_results.append(gate)
        state.tested_methods[-1]["gate_passed"] = gate.passed
        emit({"type": "gate.evaluated", "t": t, "passed": gate.passed,
              "failing": gate.failing()})

        if gate.passed:
            finalized_method = method_record
            _commit_iteration(wm, gap_id, method_record, t, stamp, finalize=True)
            emit({"type": "finalized", "t": t, "method": method_record["name"]})
            break

        _commit_iteration(wm, gap_id, method_record, t, stamp)
        branch = reassess(state, gate, gateway, budget,
                          context={"gap_id": gap_id, "mechanism": mechanism.statement})
        emit({"type": "reassess", "t": t, "branch": branch})
        if branch == "update_mechanism" or branch == "update_gap":
            chain = mechanism = fields = None
        elif branch == "update_fields":
            fields = None

    return DevOutcome(
        finalized=finalized_method is not None,
        iterations=state.iteration,
        gap_id=gap_id,
        method=finalized_method,
        loop_state=state,
        gate_results=gate_results,
        transcript=transcript,
    )


def _search_new_technique(gap_id: str, fields: FieldSet, state: LoopState,
                          gateway: AgentGateway, budget: Budget, t: int,
                          emit: EventSink) -> dict[str, Any] | None:
    """First never-searched (field, technique) candidate, in field order.
    Already-searched pairs are skipped, never re-run."""
    for field_query in fields.fields:
        payload = gateway.invoke(AgentRequest(
            role=AgentRole.SEARCHER,
            context={
                "fixture_key": f"{field_query.name}::t{t}",
                "gap_id": gap_id,
                "field": field_query.name,
                "query": field_query.query,
                "already_searched": sorted(list(p) for p in state.searched),
            },
            budget=budget,
        )).payload
        for entry in payload["techniques"]:
            pair = technique_key(entry["field"], entry["name"])
            if pair in state.searched:
                emit({"type": "technique.skipped", "t": t,
                      "technique": {"field": entry["field"], "name": entry["name"]},
                      "reason": "already searched"})
                continue
            state.searched.add(pair)
            emit({"type": "technique.searched", "t": t,
                  "technique": {"field": entry["field"], "name": entry["name"]}})
            return {"field": entry["field"], "name": entry["name"],
                    "summary": entry.get("summary", "")}
    return None


def _commit_iteration(wm: WorldModel, gap_id: str, method_record: dict[str, Any] | None,
                      t: int, stamp: ProvenanceStamp | None, finalize: bool = False) -> None:
    """Exactly one delta per iteration: the tested method (when any) and,
    on finalization, the verified solves edge."""
    iteration_stamp = ProvenanceStamp(
        project=stamp.project if stamp else "",
        phase=stamp.phase if stamp else "P3",
        agent=stamp.agent if stamp else "dev-loop",
        timestamp=stamp.timestamp if stamp else "",
        source=f"iteration-{t}",
    )
    if method_record is None:
        wm.merge(Delta(), stamp=iteration_stamp)
        return
    method_node = Node.method(
        name=method_record["name"],
        description=method_record.get("description", ""),
        technique=method_record.get("technique", ""),
        field=method_record.get("field", ""),
    )
    delta = Delta(new_nodes=[method_node])
    if finalize:
        solves = Edge.create(method_node.id, Relation.SOLVES, gap_id)
        delta.new_edges.append(solves)
        delta.verifications.extend([method_node.id, solves.id])
    wm.merge(delta, stamp=iteration_stamp)
