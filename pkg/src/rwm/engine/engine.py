"""The phase state machine around the world model.

One engine drives one store of projects. Each project advances phase by
phase; a phase either completes outright or parks the project behind human
decisions (direction at bootstrap, contribution track and gap slate after
probing). All world model writes funnel through phase-scoped commits, the
event log records every engine action, and the whole state checkpoints to
disk so a project can resume mid-consensus at the same round boundary.
"""
from __future__ import annotations

import itertools
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from ..canonical import normalize_text
from ..consensus import AgentSpec, ConsensusSession, PROBE_PERSPECTIVES
from ..devloop import run_dev_loop
from ..errors import DecisionError, EngineError, ValidationError
from ..gateway import AgentGateway, AgentRequest, AgentRole, Budget
from ..ingestion import (
    PaperRecord,
    build_phase2a,
    merge_dedup,
    rank_and_cut,
    run_venue_search,
    score_pass1,
    score_pass2,
    write_literature_csv,
)
from ..worldmodel import (
    Delta,
    Node,
    NodeKind,
    ProvenanceStamp,
    WorldModel,
    cross_links,
    gap_nodes,
)
from ..worldmodel import persist as wm_persist
from .config import RunConfig
from .events import EventLog
from .project import (
    CONTRIBUTION_TRACKS,
    PHASE_ORDER,
    PendingDecision,
    Phase,
    ProjectState,
    ReviewWeakness,
    next_phase,
    route_review,
    validate_transition,
)
from .store import ProjectStore

MAX_SEEDS = 10
PAPER_SECTIONS = ("abstract", "introduction", "method", "experiments", "conclusion")


class Engine:
    def __init__(self, store: ProjectStore, config: RunConfig, gateway: AgentGateway):
        self.store = store
        self.config = config
        self.gateway = gateway
        self._logical_clock = itertools.count(1)
        self._models: dict[str, WorldModel] = {}
        self._logs: dict[str, EventLog] = {}

    # -- plumbing ---------------------------------------------------------

    def clock(self) -> str:
        if self.config.clock == "logical":
            return f"t{next(self._logical_clock):06d}"
        return datetime.now(timezone.utc).isoformat(timespec="seconds")

    def log(self, state: ProjectState) -> EventLog:
        if state.project_id not in self._logs:
            self._logs[state.project_id] = EventLog(
                self.store.events_path(state.project_id), state.project_id, self.clock)
        return self._logs[state.project_id]

    def model(self, state: ProjectState) -> WorldModel:
        path = str(state.rwm_path)
        if path not in self._models:
            if Path(path).exists():
                self._models[path] = wm_persist.load(path)
            else:
                self._models[path] = WorldModel.empty()
        return self._models[path]

    def _save_model(self, state: ProjectState) -> None:
        wm_persist.save(self.model(state), state.rwm_path)

    def checkpoint(self, state: ProjectState) -> Path:
        state.updated_at = self.clock()
        self._save_model(state)
        return self.store.save_state(state)

    def resume(self, project_id: str) -> ProjectState:
        return self.store.load_state(project_id)

    def _stamp(self, state: ProjectState, agent: str = "engine") -> ProvenanceStamp:
        return ProvenanceStamp(project=state.project_id, phase=state.phase.value,
                               agent=agent, timestamp=self.clock())

    # -- bootstrap (phase 0) -------------------------------------------------

    def start_project(self, interest: str, seeds: Sequence[dict[str, Any]] = (), *,
                      project_id: str | None = None,
                      prior_rwm_path: str | Path | None = None) -> ProjectState:
        """Bootstrap: read seeds, brainstorm ranked directions (conditioned
        on a prior world model when given), expand queries/venues, then park
        on the direction decision."""
        if not interest or not interest.strip():
            raise ValidationError("a project needs a nonempty research interest")
        if len(seeds) > MAX_SEEDS:
            raise ValidationError(f"at most {MAX_SEEDS} seed papers, got {len(seeds)}")
        project_id = project_id or f"project-{len(self.store.list_projects()) + 1:03d}"
        self.store.create(project_id)
        rwm_path = Path(prior_rwm_path) if prior_rwm_path else self.store.model_path(project_id)
        state = ProjectState(
            project_id=project_id,
            interest=interest,
            seeds=list(seeds),
            budget=Budget(max_calls=self.config.max_calls, max_tokens=self.config.max_tokens),
            rwm_path=str(rwm_path),
            created_at=self.clock(),
        )
        log = self.log(state)
        prior_model = self.model(state)
        log.append("project.created", {"interest": interest, "seeds": len(seeds),
                                       "prior_nodes": prior_model.node_count()})
        log.append("phase.started", {"phase": Phase.P0.value})

        summaries = []
        if seeds:
            requests = [AgentRequest(
                role=AgentRole.READER,
                context={"fixture_key": s.get("title", f"seed-{i}"), "seed": s},
                budget=state.budget, agent_id=f"reader-{i}",
            ) for i, s in enumerate(seeds)]
            for seed, outcome in zip(seeds, self.gateway.invoke_all(requests)):
                if isinstance(outcome, Exception):
                    raise outcome
                summaries.append({"title": seed.get("title", ""),
                                  "summary": outcome.payload["summary"]})

        brainstorm_context: dict[str, Any] = {
            "fixture_key": "brainstorm",
            "interest": interest,
            "seed_summaries": summaries,
        }
        if prior_model.node_count() > 0:
            brainstorm_context["prior_model_summary"] = {
                "nodes": prior_model.node_count(),
                "edges": prior_model.edge_count(),
                "gaps": [n.attributes.get("description")
                         for n in prior_model.nodes_of_kind(NodeKind.GAP)],
            }
        directions = self.gateway.invoke(AgentRequest(
            role=AgentRole.BRAINSTORM, context=brainstorm_context,
            budget=state.budget)).payload["directions"]
        ranked = sorted(
            directions,
            key=lambda d: (-(d["novelty"] + d["feasibility"] + d["impact"]), d["title"]))
        state.directions = [{**d, "rank": i + 1} for i, d in enumerate(ranked)]

        expansion = self.gateway.invoke(AgentRequest(
            role=AgentRole.QUERY_EXPANDER,
            context={"fixture_key": "expand", "interest": interest},
            budget=state.budget)).payload
        state.queries = list(expansion["queries"])
        state.venues = list(expansion["venues"])[:self.config.max_venues]

        state.phase_work_done = True
        self._create_decision(state, PendingDecision(
            kind="select_direction",
            options=[{"id": str(d["rank"]), "label": d["title"],
                      "scores": {k: d[k] for k in ("novelty", "feasibility", "impact")}}
                     for d in state.directions],
            evidence={"seed_summaries": summaries},
            created_at=self.clock(),
        ))
        self.checkpoint(state)
        return state

    # -- decisions --------------------------------------------------------------

    def pending_decisions(self, state: ProjectState) -> list[PendingDecision]:
        return list(state.pending)

    def submit_decision(self, state: ProjectState, kind: str, option: str,
                        actor: str = "human") -> ProjectState:
        decision = state.pending_of(kind)
        if decision is None:
            raise DecisionError(f"no pending {kind!r} decision")
        option = str(option)
        if option not in decision.option_ids():
            raise DecisionError(
                f"option {option!r} was not offered for {kind}; "
                f"choose from {decision.option_ids()}")
        if kind == "select_direction":
            chosen = next(o for o in decision.options if str(o["id"]) == option)
            state.chosen_direction = chosen["label"]
        elif kind == "select_track":
            state.contribution_track = option
        elif kind == "approve_gap_slate":
            state.approved_gap = option
        state.pending = [d for d in state.pending if d.kind != kind]
        record = {"kind": kind, "option": option, "actor": actor, "ts": self.clock()}
        state.decision_log.append(record)
        self.log(state).append("decision.submitted", record)
        self.checkpoint(state)
        return state

    def _create_decision(self, state: ProjectState, decision: PendingDecision) -> None:
        state.pending.append(decision)
        self.log(state).append("decision.pending", decision.to_dict())
        if self.config.non_interactive:
            # auto-select policy for CI runs: take the top-ranked option
            self.submit_decision(state, decision.kind, decision.option_ids()[0],
                                 actor="auto-select")

    # -- the phase pointer ---------------------------------------------------------

    def advance(self, state: ProjectState) -> ProjectState:
        """Run the current phase, or move past it once its gates cleared.
        Phase errors propagate with the pointer unchanged (resumable)."""
        if state.pending:
            kinds = [d.kind for d in state.pending]
            raise EngineError(f"blocked on pending decisions: {kinds}")
        if state.phase is Phase.DONE:
            raise EngineError("project is complete")
        if state.phase_work_done:
            self._transition(state, next_phase(state.phase))
            self.checkpoint(state)
            return state
        route_to = self._run_phase(state)
        state.phase_work_done = True
        if not state.pending:
            self._transition(state, route_to or next_phase(state.phase))
        self.checkpoint(state)
        return state

    def _transition(self, state: ProjectState, target: Phase) -> None:
        if not validate_transition(state.phase, target):
            raise EngineError(f"illegal transition {state.phase.value} -> {target.value}")
        self.log(state).append("phase.completed", {"phase": state.phase.value})
        state.phase = target
        state.phase_work_done = False
        if target is not Phase.DONE:
            self.log(state).append("phase.started", {"phase": target.value})
        else:
            self.log(state).append("project.done", {})

    def _run_phase(self, state: ProjectState) -> Phase | None:
        phase = state.phase
        if phase is Phase.P0:
            # bootstrap work ran in start_project; nothing left once d* is set
            if state.chosen_direction is None:
                raise EngineError("cannot leave P0 without a chosen direction")
            return None
        runner = {
            Phase.P1: self._phase_literature,
            Phase.P2A: self._phase_build_model,
            Phase.P2B: self._phase_probing,
            Phase.P3: self._phase_development,
            Phase.P4: self._phase_evaluation,
            Phase.P5: self._phase_packaging,
            Phase.P6: self._phase_writing,
            Phase.P7: self._phase_review,
        }[phase]
        return runner(state)

    # -- phase bodies ---------------------------------------------------------------

    def _phase_literature(self, state: ProjectState) -> None:
        log = self.log(state)
        search = run_venue_search(state.queries, state.venues, self.gateway,
                                  state.budget, max_venues=self.config.max_venues)
        for failure in search.failures:
            log.append("venue.failed", failure)
        records = merge_dedup(search.records)
        scored = [(r, score_pass1(r, self.gateway, state.budget)) for r in records]
        top = rank_and_cut(scored, self.config.top_k)
        enriched = []
        for record, s1 in top:
            s2 = score_pass2(record, s1, self.gateway, state.budget)
            enriched.append((record, s1, s2))
        write_literature_csv(enriched, self.store.reports_dir(state.project_id) / "literature.csv")
        delta = Delta(new_nodes=[
            Node.paper(title=r.title, venue=r.venue, year=r.year, url=r.url)
            for r, _, _ in enriched])
        summary = self.model(state).merge(delta, stamp=self._stamp(state, "literature"))
        log.append("rwm.committed", summary)
        state.records["top_papers"] = [r.to_dict() for r, _, _ in enriched]
        state.records["literature"] = [
            {"title": r.title, "venue": r.venue, "s1": s1.total, "s2": s2.total}
            for r, s1, s2 in enriched]

    def _phase_build_model(self, state: ProjectState) -> None:
        log = self.log(state)
        papers = [PaperRecord.from_dict(p) for p in state.records.get("top_papers", [])]
        for paper in papers:
            if paper.full_text is None:
                paper.full_text = paper.abstract or paper.title
        result = build_phase2a(
            self.model(state), papers, self.gateway, state.budget,
            stamp=self._stamp(state, "extraction"),
            theta_dedup=self.config.theta_dedup,
            tau_shared=self.config.tau_shared,
            max_papers=self.config.top_k,
            parallelism=self.config.parallelism)
        for failure in result.failures:
            log.append("extraction.failed", failure)
        for extraction in result.extractions:
            for warning in extraction.warnings:
                log.append("extraction.warning", {"paper": extraction.source_paper,
                                                  "warning": warning})
        wm = self.model(state)
        log.append("rwm.committed", {
            "nodes_added": len(result.delta.new_nodes),
            "edges_added": len(result.delta.new_edges),
            "node_total": wm.node_count(),
            "edge_total": wm.edge_count(),
        })
        state.records["phase2a"] = {
            "extracted": len(result.extractions),
            "failures": len(result.failures),
            "dedup_classes": result.dedup_classes,
            "gaps_promoted": result.gaps_promoted,
        }

    def _phase_probing(self, state: ProjectState) -> None:
        log = self.log(state)
        if state.consensus_state is not None:
            session = ConsensusSession.from_dict(state.consensus_state)
        else:
            session = ConsensusSession(
                agents=[AgentSpec(agent_id=f"prober-{i}",
                                  perspective=PROBE_PERSPECTIVES[i % len(PROBE_PERSPECTIVES)])
                        for i in range(self.config.agents_k)],
                orchestrator=AgentSpec(agent_id="orchestrator"),
                round_limit=self.config.round_limit,
            )
        while not session.done:
            session.run_cycle(
                self.model(state), self.gateway, state.budget,
                stamp=self._stamp(state, "consensus"),
                sink=lambda e: log.append(f"consensus.{e['type']}", e))
            state.consensus_state = session.to_dict()
            self.checkpoint(state)  # resumable at the round boundary
        result = session.result()
        state.records["consensus"] = {
            "rounds_executed": result.rounds_executed,
            "quiescent": result.quiescent,
            "gaps": [g.to_dict() for g in result.verified_gaps],
        }
        self._create_decision(state, PendingDecision(
            kind="select_track",
            options=[{"id": track, "label": track} for track in CONTRIBUTION_TRACKS],
            evidence={"gaps": [g.to_dict() for g in result.verified_gaps]},
            created_at=self.clock(),
        ))
        verified = [g for g in result.verified_gaps if g.uncertainty == 0]
        if verified:
            self._create_decision(state, PendingDecision(
                kind="approve_gap_slate",
                options=[{"id": Node.gap(description=g.description, gap_type=g.gap_type).id,
                          "label": g.description,
                          "multiplicity": g.multiplicity,
                          "evidence_refs": g.evidence}
                         for g in verified],
                evidence={"transcript_events": len(result.transcript)},
                created_at=self.clock(),
            ))

    def _phase_development(self, state: ProjectState) -> None:
        log = self.log(state)
        if state.approved_gap is None:
            log.append("devloop.skipped", {"reason": "no verified gap approved"})
            state.records["devloop"] = {"skipped": True}
            return
        outcome = run_dev_loop(
            state.approved_gap, self.model(state), self.gateway, state.budget,
            t_max=self.config.t_max,
            stamp=self._stamp(state, "dev-loop"),
            sink=lambda e: log.append(f"devloop.{e['type']}", e))
        state.records["devloop"] = {
            "finalized": outcome.finalized,
            "iterations": outcome.iterations,
            "method": outcome.method,
            "loop_state": outcome.loop_state.to_dict(),
        }

    def _phase_evaluation(self, state: ProjectState) -> None:
        method = (state.records.get("devloop") or {}).get("method") or {"name": "candidate"}
        payload = self.gateway.invoke(AgentRequest(
            role=AgentRole.EVALUATOR,
            context={"fixture_key": "evaluation", "method": method,
                     "required": {"seeds": 3, "cross_model": True,
                                  "ablation": True, "error_analysis": True}},
            budget=state.budget)).payload
        state.records["evaluation"] = {
            "seeds": payload["seeds"],
            "cross_model": payload["cross_model"],
            "ablation": payload["ablation"],
            "error_analysis": payload["error_analysis"],
        }
        self.log(state).append("evaluation.recorded", state.records["evaluation"])

    def _phase_packaging(self, state: ProjectState) -> None:
        bundle_dir = self.store.reports_dir(state.project_id) / "bundle"
        bundle_dir.mkdir(exist_ok=True)
        wm_persist.save(self.model(state), bundle_dir / "model.rwm.json")
        manifest = {
            "project": state.project_id,
            "phase_records": sorted(state.records),
            "events": self.log(state).last_seq,
            "model_nodes": self.model(state).node_count(),
        }
        (bundle_dir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
        state.records["bundle"] = str(bundle_dir)
        self.log(state).append("bundle.written", manifest)

    def _phase_writing(self, state: ProjectState) -> None:
        requests = [AgentRequest(
            role=AgentRole.WRITER,
            context={"fixture_key": section, "section": section,
                     "direction": state.chosen_direction,
                     "track": state.contribution_track},
            budget=state.budget, agent_id=f"writer-{section}",
        ) for section in PAPER_SECTIONS]
        sections = {}
        for section, outcome in zip(PAPER_SECTIONS, self.gateway.invoke_all(requests)):
            if isinstance(outcome, Exception):
                raise outcome
            sections[section] = outcome.payload["text"]
        out_dir = self.store.reports_dir(state.project_id) / "sections"
        out_dir.mkdir(exist_ok=True)
        for section, text in sections.items():
            (out_dir / f"{section}.md").write_text(text, encoding="utf-8")
        state.records["sections"] = sorted(sections)
        self.log(state).append("sections.written", {"sections": sorted(sections)})

    def _phase_review(self, state: ProjectState) -> Phase | None:
        log = self.log(state)
        payload = self.gateway.invoke(AgentRequest(
            role=AgentRole.REVIEWER,
            context={"fixture_key": f"review-{state.review_cycles}",
                     "sections": state.records.get("sections", [])},
            budget=state.budget)).payload
        weaknesses = [ReviewWeakness(category=w["category"], text=w["text"])
                      for w in payload["weaknesses"]]
        routed = route_review(weaknesses)
        state.records["review"] = [
            {"category": w.category, "text": w.text, "target": target.value}
            for w, target in routed]
        for w, target in routed:
            log.append("review.routed", {"category": w.category, "text": w.text,
                                         "target": target.value})
        if not routed:
            return Phase.DONE
        if state.review_cycles >= self.config.max_review_cycles:
            log.append("review.accepted_with_weaknesses",
                       {"remaining": len(routed), "cycles": state.review_cycles})
            return Phase.DONE
        state.review_cycles += 1
        # earliest routed phase wins so one pass fixes everything downstream
        target = min((t for _, t in routed), key=PHASE_ORDER.index)
        return target

    # -- cross-project structure ---------------------------------------------------

    def cross_project_links(self, state: ProjectState, other_project: str) -> list[str]:
        return cross_links(self.model(state).snapshot(), state.project_id, other_project)

    def graph_payload(self, state: ProjectState) -> dict[str, Any]:
        # reads go against an immutable snapshot, never the live store
        return wm_persist.to_payload(self.model(state).snapshot())

    def gaps_payload(self, state: ProjectState) -> list[dict[str, Any]]:
        payload = gap_nodes(self.model(state).snapshot())
        consensus = state.records.get("consensus", {})
        multiplicities = {normalize_text(g["description"]): g["multiplicity"]
                          for g in consensus.get("gaps", [])}
        for gap in payload:
            key = normalize_text(gap["attributes"].get("description", ""))
            if key in multiplicities:
                gap["multiplicity"] = multiplicities[key]
        return payload
