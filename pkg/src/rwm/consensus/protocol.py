"""The two-round probing protocol with orchestrated routing.

Round 1 runs every prober independently against the same snapshot; only
after the whole round is collected (the barrier) does round 2 start, with
every agent seeing all agents' round-1 findings. Corroboration tags each
distinct round-2 gap with uncertainty (verified when proposed by two or
more agents); the orchestrator then assigns exactly one routing decision
to every gap and task proposal. The outer loop repeats round pairs while
approved tasks remain, committing surviving gaps to the world model at
each cycle boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from ..errors import ConsensusError, GatewayError, ValidationError
from ..gateway import AgentGateway, AgentRequest, AgentRole, Budget
from ..worldmodel import Delta, Node, NodeKind, ProvenanceStamp, WorldModel
from .types import (
    CORROBORATION_THRESHOLD,
    AgentSpec,
    ConsensusResult,
    CorroboratedGap,
    GapCandidate,
    OrchestratorDecision,
    TaskProposal,
)

EventSink = Callable[[dict[str, Any]], None]


def _emit(sink: EventSink | None, event: dict[str, Any]) -> None:
    if sink is not None:
        sink(event)


def _model_summary(wm: WorldModel) -> dict[str, Any]:
    return {
        "nodes": wm.node_count(),
        "edges": wm.edge_count(),
        "gaps": [n.attributes.get("description", "") for n in wm.nodes_of_kind(NodeKind.GAP)],
        "limitations": [n.attributes.get("description", "")
                        for n in wm.nodes_of_kind(NodeKind.LIMITATION)],
    }


def _probe_request(agent: AgentSpec, round_no: int, cycle: int, wm: WorldModel,
                   budget: Budget, assigned: Sequence[TaskProposal],
                   visibility: list[dict[str, Any]] | None,
                   extra_context: dict[str, Any] | None) -> AgentRequest:
    context: dict[str, Any] = {
        "fixture_key": f"{agent.agent_id}::c{cycle}::r{round_no}",
        "agent_id": agent.agent_id,
        "perspective": agent.perspective,
        "round": round_no,
        "cycle": cycle,
        "assigned_tasks": [t.to_dict() for t in assigned],
        "model_summary": _model_summary(wm),
    }
    if visibility is not None:
        context["visibility"] = visibility
    if extra_context:
        context.update(extra_context)
    return AgentRequest(role=AgentRole.PROBER, context=context,
                        budget=budget, agent_id=agent.agent_id)


def _parse_gaps(agent: AgentSpec, payload: dict[str, Any], round_no: int,
                wm: WorldModel) -> list[GapCandidate]:
    candidates = []
    for entry in payload["gaps"]:
        candidate = GapCandidate(
            description=entry["description"],
            gap_type=entry.get("gap_type", "methods"),
            evidence=[str(e) for e in entry.get("evidence", [])],
            proposer=agent.agent_id,
            round=round_no,
        )
        for ref in candidate.evidence:
            if not wm.has_element(ref):
                raise ConsensusError(
                    f"{agent.agent_id} cited evidence {ref} absent from the round snapshot")
        candidates.append(candidate)
    return candidates


def _parse_proposals(agent: AgentSpec, payload: dict[str, Any]) -> list[TaskProposal]:
    proposals = []
    for entry in payload.get("proposals", []):
        proposals.append(TaskProposal(
            description=entry["description"],
            kind=entry["kind"],
            targets=[str(t) for t in entry.get("targets", [])],
            proposer=agent.agent_id,
        ))
    return proposals


def run_round1(agents: Sequence[AgentSpec], wm_snapshot: WorldModel,
               gateway: AgentGateway, budget: Budget, *, cycle: int = 1,
               assignments: dict[str, list[TaskProposal]] | None = None,
               extra_context: dict[str, Any] | None = None,
               sink: EventSink | None = None) -> list[list[GapCandidate]]:
    """Independent round: no agent sees another's output. A failing agent
    contributes an empty set rather than aborting the round."""
    if not agents:
        raise ValidationError("round 1 needs at least one probing agent")
    assignments = assignments or {}
    requests = [
        _probe_request(agent, 1, cycle, wm_snapshot, budget,
                       assignments.get(agent.agent_id, []), None, extra_context)
        for agent in agents
    ]
    _emit(sink, {"type": "round.started", "round": 1, "cycle": cycle,
                 "agents": [a.agent_id for a in agents]})
    outcomes = gateway.invoke_all(requests)
    sets: list[list[GapCandidate]] = []
    for agent, outcome in zip(agents, outcomes):
        if isinstance(outcome, Exception):
            _emit(sink, {"type": "agent.failed", "round": 1, "cycle": cycle,
                         "agent": agent.agent_id, "error": str(outcome)})
            sets.append([])
            continue
        try:
            candidates = _parse_gaps(agent, outcome.payload, 1, wm_snapshot)
        except ConsensusError as exc:
            _emit(sink, {"type": "agent.failed", "round": 1, "cycle": cycle,
                         "agent": agent.agent_id, "error": str(exc)})
            sets.append([])
            continue
        for candidate in candidates:
            _emit(sink, {"type": "finding", "round": 1, "cycle": cycle,
                         "agent": agent.agent_id, "gap": candidate.to_dict()})
        sets.append(candidates)
    _emit(sink, {"type": "round.completed", "round": 1, "cycle": cycle,
                 "set_sizes": [len(s) for s in sets]})
    return sets


def run_round2(agents: Sequence[AgentSpec], wm_snapshot: WorldModel,
               all_round1: Sequence[GapCandidate], gateway: AgentGateway,
               budget: Budget, *, cycle: int = 1,
               assignments: dict[str, list[TaskProposal]] | None = None,
               extra_context: dict[str, Any] | None = None,
               sink: EventSink | None = None,
               ) -> list[tuple[list[GapCandidate], list[TaskProposal]]]:
    """Shared-visibility round: every agent receives the full union of
    round-1 findings and may additionally propose next-step tasks."""
    assignments = assignments or {}
    visibility = [c.to_dict() for c in all_round1]
    requests = [
        _probe_request(agent, 2, cycle, wm_snapshot, budget,
                       assignments.get(agent.agent_id, []), visibility, extra_context)
        for agent in agents
    ]
    _emit(sink, {"type": "round.started", "round": 2, "cycle": cycle,
                 "visibility_size": len(visibility)})
    outcomes = gateway.invoke_all(requests)
    results: list[tuple[list[GapCandidate], list[TaskProposal]]] = []
    for agent, outcome in zip(agents, outcomes):
        if isinstance(outcome, Exception):
            _emit(sink, {"type": "agent.failed", "round": 2, "cycle": cycle,
                         "agent": agent.agent_id, "error": str(outcome)})
            results.append(([], []))
            continue
        try:
            gaps = _parse_gaps(agent, outcome.payload, 2, wm_snapshot)
        except ConsensusError as exc:
            _emit(sink, {"type": "agent.failed", "round": 2, "cycle": cycle,
                         "agent": agent.agent_id, "error": str(exc)})
            results.append(([], []))
            continue
        proposals = _parse_proposals(agent, outcome.payload)
        for gap in gaps:
            _emit(sink, {"type": "finding", "round": 2, "cycle": cycle,
                         "agent": agent.agent_id, "gap": gap.to_dict()})
        for proposal in proposals:
            _emit(sink, {"type": "proposal", "cycle": cycle,
                         "agent": agent.agent_id, "task": proposal.to_dict()})
        results.append((gaps, proposals))
    _emit(sink, {"type": "round.completed", "round": 2, "cycle": cycle,
                 "set_sizes": [len(g) for g, _ in results]})
    return results


def corroborate(round2_sets: Sequence[Sequence[GapCandidate]]) -> list[CorroboratedGap]:
    """Uncertainty by corroboration: verified (0) when two or more distinct
    agents proposed the same canonical key in round 2, else unverified."""
    by_key: dict[str, list[GapCandidate]] = {}
    for candidate_set in round2_sets:
        for candidate in candidate_set:
            by_key.setdefault(candidate.canonical_key, []).append(candidate)
    corroborated = []
    for key in sorted(by_key):
        candidates = by_key[key]
        proposers = sorted({c.proposer for c in candidates})
        evidence = sorted({ref for c in candidates for ref in c.evidence})
        multiplicity = len(proposers)
        corroborated.append(CorroboratedGap(
            key=key,
            description=candidates[0].description,
            gap_type=candidates[0].gap_type,
            uncertainty=0 if multiplicity >= CORROBORATION_THRESHOLD else 1,
            multiplicity=multiplicity,
            proposers=proposers,
            evidence=evidence,
        ))
    return corroborated


def orchestrate(gaps: Sequence[CorroboratedGap], proposals: Sequence[TaskProposal],
                orchestrator: AgentSpec, gateway: AgentGateway, budget: Budget, *,
                cycle: int = 1, extra_context: dict[str, Any] | None = None,
                sink: EventSink | None = None,
                ) -> tuple[list[CorroboratedGap], list[TaskProposal], list[OrchestratorDecision]]:
    """Ask the orchestrator for one routing decision per gap and per task.

    Decisions are recorded verbatim and validated for totality only; a
    response that leaves subjects undecided is retried once with the
    uncovered subjects named, then rejected.
    """
    tasks = list(proposals)
    for index, task in enumerate(tasks):
        task.task_id = task.task_id or f"task-c{cycle}-{index}"
    subjects = [g.key for g in gaps] + [t.task_id for t in tasks]
    context = {
        "fixture_key": f"{orchestrator.agent_id}::c{cycle}",
        "cycle": cycle,
        "gaps": [g.to_dict() for g in gaps],
        "proposals": [t.to_dict() for t in tasks],
        "subjects": subjects,
    }
    if extra_context:
        context.update(extra_context)
    decisions = None
    for attempt in (1, 2):
        response = gateway.invoke(AgentRequest(
            role=AgentRole.ORCHESTRATOR, context=context,
            budget=budget, agent_id=orchestrator.agent_id))
        decisions = [_parse_decision(d) for d in response.payload["decisions"]]
        uncovered, duplicated = _coverage(subjects, decisions)
        if not uncovered and not duplicated:
            break
        if attempt == 2:
            raise ConsensusError(
                f"orchestrator decisions not total: uncovered={uncovered}, "
                f"duplicated={duplicated}")
        context = dict(context)
        context["repair_hint"] = (
            f"every subject needs exactly one decision; uncovered={uncovered}, "
            f"duplicated={duplicated}")
    assert decisions is not None

    surviving: list[CorroboratedGap] = []
    approved: list[TaskProposal] = []
    gap_by_key = {g.key: g for g in gaps}
    task_by_id = {t.task_id: t for t in tasks}
    for decision in decisions:
        _emit(sink, {"type": "decision", "cycle": cycle, "decision": decision.to_dict()})
        gap_subjects = [s for s in decision.subject if s in gap_by_key]
        task_subjects = [s for s in decision.subject if s in task_by_id]
        if decision.action == "kill":
            continue
        if gap_subjects:
            if decision.action == "merge" and len(gap_subjects) > 1:
                members = [gap_by_key[s] for s in gap_subjects]
                merged = CorroboratedGap(
                    key=members[0].key,
                    description=decision.merged_description
                    or "; ".join(m.description for m in members),
                    gap_type=members[0].gap_type,
                    uncertainty=min(m.uncertainty for m in members),
                    multiplicity=max(m.multiplicity for m in members),
                    proposers=sorted({p for m in members for p in m.proposers}),
                    evidence=sorted({e for m in members for e in m.evidence}),
                )
                surviving.append(merged)
            else:
                surviving.extend(gap_by_key[s] for s in gap_subjects)
        for subject in task_subjects:
            approved.append(task_by_id[subject])
    surviving.sort(key=lambda g: g.key)
    return surviving, approved, decisions


def _parse_decision(payload: dict[str, Any]) -> OrchestratorDecision:
    subject = payload["subject"]
    if isinstance(subject, str):
        subject = [subject]
    return OrchestratorDecision(
        action=payload["action"],
        subject=[str(s) for s in subject],
        rationale=payload.get("rationale", ""),
        merged_description=payload.get("merged_description"),
        redirect_to=payload.get("redirect_to"),
    )


def _coverage(subjects: Sequence[str], decisions: Sequence[OrchestratorDecision],
              ) -> tuple[list[str], list[str]]:
    counts: dict[str, int] = {s: 0 for s in subjects}
    for decision in decisions:
        for subject in decision.subject:
            if subject in counts:
                counts[subject] += 1
    uncovered = sorted(s for s, n in counts.items() if n == 0)
    duplicated = sorted(s for s, n in counts.items() if n > 1)
    return uncovered, duplicated


@dataclass
class ConsensusSession:
    """Checkpointable driver for the outer consensus loop.

    One cycle = round pair + corroboration + orchestration + commit; the
    engine persists the session between cycles so a resumed project picks
    up at the same round boundary.
    """

    agents: list[AgentSpec]
    orchestrator: AgentSpec
    round_limit: int = 4
    cycle: int = 0
    rounds_executed: int = 0
    quiescent: bool = False
    assignments: dict[str, list[TaskProposal]] = field(default_factory=dict)
    gaps: list[CorroboratedGap] = field(default_factory=list)
    decisions: list[OrchestratorDecision] = field(default_factory=list)
    transcript: list[dict[str, Any]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.round_limit < 2:
            raise ValidationError("round_limit must be at least 2")

    @property
    def done(self) -> bool:
        # a cycle costs a full round pair; never start one that would
        # push rounds_executed past the limit
        return self.quiescent or self.rounds_executed + 2 > self.round_limit

    def run_cycle(self, wm: WorldModel, gateway: AgentGateway, budget: Budget,
                  extra_context: dict[str, Any] | None = None,
                  stamp: ProvenanceStamp | None = None,
                  sink: EventSink | None = None) -> list[CorroboratedGap]:
        """One round pair against a fresh snapshot, then commit G*."""
        def record(event: dict[str, Any]) -> None:
            self.transcript.append(event)
            _emit(sink, event)

        self.cycle += 1
        snapshot = wm.snapshot()
        round1_sets = run_round1(self.agents, snapshot, gateway, budget,
                                 cycle=self.cycle, assignments=self.assignments,
                                 extra_context=extra_context, sink=record)
        self.rounds_executed += 1
        union = [c for candidate_set in round1_sets for c in candidate_set]
        round2 = run_round2(self.agents, snapshot, union, gateway, budget,
                            cycle=self.cycle, assignments=self.assignments,
                            extra_context=extra_context, sink=record)
        self.rounds_executed += 1
        corroborated = corroborate([gaps for gaps, _ in round2])
        for gap in corroborated:
            record({"type": "corroboration", "cycle": self.cycle, "gap": gap.to_dict()})
        proposals = [p for _, agent_proposals in round2 for p in agent_proposals]
        surviving, approved, decisions = orchestrate(
            corroborated, proposals, self.orchestrator, gateway, budget,
            cycle=self.cycle, extra_context=extra_context, sink=record)
        self.decisions.extend(decisions)
        self._merge_surviving(surviving)
        self._commit(wm, surviving, stamp)
        self.assignments = self._assign(approved)
        if not approved:
            self.quiescent = True
        record({"type": "cycle.completed", "cycle": self.cycle,
                "surviving": len(surviving), "approved_tasks": len(approved),
                "quiescent": self.quiescent})
        return surviving

    def _merge_surviving(self, surviving: Sequence[CorroboratedGap]) -> None:
        by_key = {g.key: g for g in self.gaps}
        for gap in surviving:
            existing = by_key.get(gap.key)
            if existing is None or gap.uncertainty < existing.uncertainty:
                by_key[gap.key] = gap
        self.gaps = [by_key[k] for k in sorted(by_key)]

    def _commit(self, wm: WorldModel, surviving: Sequence[CorroboratedGap],
                stamp: ProvenanceStamp | None) -> None:
        if not surviving:
            return
        nodes = []
        verifications = []
        for gap in surviving:
            node = Node.gap(description=gap.description, gap_type=gap.gap_type,
                            corroboration=gap.multiplicity)
            nodes.append(node)
            if gap.uncertainty == 0:
                verifications.append(node.id)
        wm.merge(Delta(new_nodes=nodes, verifications=verifications), stamp=stamp)

    def _assign(self, approved: Sequence[TaskProposal]) -> dict[str, list[TaskProposal]]:
        assignments: dict[str, list[TaskProposal]] = {}
        agent_ids = [a.agent_id for a in self.agents]
        cursor = 0
        for task in approved:
            if task.kind == "redirect_agent" and task.targets:
                target = task.targets[0]
                if target not in agent_ids:
                    raise ConsensusError(f"redirect targets unknown agent {target}")
            else:
                target = agent_ids[cursor % len(agent_ids)]
                cursor += 1
            assignments.setdefault(target, []).append(task)
        return assignments

    def result(self) -> ConsensusResult:
        return ConsensusResult(
            verified_gaps=list(self.gaps),
            approved_tasks=[t for tasks in self.assignments.values() for t in tasks],
            decisions=list(self.decisions),
            rounds_executed=self.rounds_executed,
            quiescent=self.quiescent,
            transcript=list(self.transcript),
        )

    # -- checkpoint support ---------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "agents": [{"agent_id": a.agent_id, "perspective": a.perspective}
                       for a in self.agents],
            "orchestrator": {"agent_id": self.orchestrator.agent_id,
                             "perspective": self.orchestrator.perspective},
            "round_limit": self.round_limit,
            "cycle": self.cycle,
            "rounds_executed": self.rounds_executed,
            "quiescent": self.quiescent,
            "assignments": {agent: [t.to_dict() for t in tasks]
                            for agent, tasks in sorted(self.assignments.items())},
            "gaps": [g.to_dict() for g in self.gaps],
            "decisions": [d.to_dict() for d in self.decisions],
            "transcript": list(self.transcript),
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "ConsensusSession":
        session = cls(
            agents=[AgentSpec(**a) for a in payload["agents"]],
            orchestrator=AgentSpec(**payload["orchestrator"]),
            round_limit=payload["round_limit"],
            cycle=payload["cycle"],
            rounds_executed=payload["rounds_executed"],
            quiescent=payload["quiescent"],
        )
        session.assignments = {
            agent: [_task_from_dict(t) for t in tasks]
            for agent, tasks in payload["assignments"].items()
        }
        session.gaps = [CorroboratedGap(**g) for g in payload["gaps"]]
        session.decisions = [_parse_decision(d) for d in payload["decisions"]]
        session.transcript = list(payload["transcript"])
        return session


def _task_from_dict(payload: dict[str, Any]) -> TaskProposal:
    return TaskProposal(
        description=payload["description"],
        kind=payload["kind"],
        targets=list(payload.get("targets", [])),
        proposer=payload.get("proposer", ""),
        task_id=payload.get("task_id", ""),
    )


def run_consensus(agents: Sequence[AgentSpec], orchestrator: AgentSpec,
                  wm: WorldModel, gateway: AgentGateway, budget: Budget, *,
                  round_limit: int = 4,
                  extra_context: dict[str, Any] | None = None,
                  stamp: ProvenanceStamp | None = None,
                  sink: EventSink | None = None) -> ConsensusResult:
    """Loop round pairs until no tasks are approved or the limit is hit.
    Hitting the limit with tasks pending is flagged, not raised."""
    session = ConsensusSession(agents=list(agents), orchestrator=orchestrator,
                               round_limit=round_limit)
    while not session.done:
        session.run_cycle(wm, gateway, budget, extra_context=extra_context,
                          stamp=stamp, sink=sink)
    return session.result()
