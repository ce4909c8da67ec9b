"""Project state: the phase machine's checkpointable record.

Phases run in a fixed forward order; the only backward transitions are the
four review-triggered routes out of the final review phase. Human decision
points block their phase until resolved and are part of the checkpoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from ..errors import EngineError, MigrationRequiredError, ValidationError
from ..gateway import Budget

STATE_SCHEMA_VERSION = 1

CONTRIBUTION_TRACKS = ("methods", "benchmark", "position")


class Phase(str, Enum):
    P0 = "P0"
    P1 = "P1"
    P2A = "P2a"
    P2B = "P2b"
    P3 = "P3"
    P4 = "P4"
    P5 = "P5"
    P6 = "P6"
    P7 = "P7"
    DONE = "Done"


PHASE_ORDER = [Phase.P0, Phase.P1, Phase.P2A, Phase.P2B, Phase.P3,
               Phase.P4, Phase.P5, Phase.P6, Phase.P7, Phase.DONE]

REVIEW_ROUTES: dict[str, Phase] = {
    "writing": Phase.P6,
    "missing_experiments": Phase.P4,
    "method_weakness": Phase.P3,
    "novelty_concern": Phase.P2B,
}

DECISION_KINDS = ("select_direction", "select_track", "approve_gap_slate")


def next_phase(phase: Phase) -> Phase:
    index = PHASE_ORDER.index(phase)
    if index + 1 >= len(PHASE_ORDER):
        raise EngineError(f"no phase follows {phase.value}")
    return PHASE_ORDER[index + 1]


def validate_transition(src: Phase, dst: Phase) -> bool:
    """Forward one step, or one of the four review back-edges."""
    if src is Phase.DONE:
        return False
    if dst is next_phase(src):
        return True
    return src is Phase.P7 and dst in REVIEW_ROUTES.values()


@dataclass
class ReviewWeakness:
    category: str
    text: str

    def __post_init__(self) -> None:
        if self.category not in REVIEW_ROUTES:
            raise ValidationError(
                f"unknown weakness category {self.category!r}; "
                f"expected one of {sorted(REVIEW_ROUTES)}")


def route_review(weaknesses: list[ReviewWeakness]) -> list[tuple[ReviewWeakness, Phase]]:
    """Deterministic, total category -> phase mapping."""
    return [(w, REVIEW_ROUTES[w.category]) for w in weaknesses]


@dataclass
class PendingDecision:
    kind: str
    options: list[dict[str, Any]]
    evidence: dict[str, Any] = field(default_factory=dict)
    created_at: str = ""

    def __post_init__(self) -> None:
        if self.kind not in DECISION_KINDS:
            raise ValidationError(f"unknown decision kind {self.kind!r}")
        if not self.options:
            raise ValidationError(f"decision {self.kind} offered no options")

    def option_ids(self) -> list[str]:
        return [str(o["id"]) for o in self.options]

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "options": self.options,
                "evidence": self.evidence, "created_at": self.created_at}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "PendingDecision":
        return cls(kind=payload["kind"], options=list(payload["options"]),
                   evidence=dict(payload.get("evidence", {})),
                   created_at=payload.get("created_at", ""))


@dataclass
class ProjectState:
    project_id: str
    interest: str
    seeds: list[dict[str, Any]] = field(default_factory=list)
    directions: list[dict[str, Any]] = field(default_factory=list)
    chosen_direction: str | None = None
    queries: list[str] = field(default_factory=list)
    venues: list[str] = field(default_factory=list)
    contribution_track: str | None = None
    approved_gap: str | None = None
    phase: Phase = Phase.P0
    phase_work_done: bool = False
    pending: list[PendingDecision] = field(default_factory=list)
    decision_log: list[dict[str, Any]] = field(default_factory=list)
    budget: Budget = field(default_factory=lambda: Budget(max_calls=2000, max_tokens=5_000_000))
    rwm_path: str = ""
    records: dict[str, Any] = field(default_factory=dict)
    consensus_state: dict[str, Any] | None = None
    review_cycles: int = 0
    created_at: str = ""
    updated_at: str = ""

    def pending_of(self, kind: str) -> PendingDecision | None:
        for decision in self.pending:
            if decision.kind == kind:
                return decision
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": STATE_SCHEMA_VERSION,
            "project_id": self.project_id,
            "interest": self.interest,
            "seeds": self.seeds,
            "directions": self.directions,
            "chosen_direction": self.chosen_direction,
            "queries": self.queries,
            "venues": self.venues,
            "contribution_track": self.contribution_track,
            "approved_gap": self.approved_gap,
            "phase": self.phase.value,
            "phase_work_done": self.phase_work_done,
            "pending": [d.to_dict() for d in self.pending],
            "decision_log": self.decision_log,
            "budget": self.budget.to_dict(),
            "rwm_path": self.rwm_path,
            "records": self.records,
            "consensus_state": self.consensus_state,
            "review_cycles": self.review_cycles,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "ProjectState":
        version = payload.get("schema_version")
        if version != STATE_SCHEMA_VERSION:
            raise MigrationRequiredError(
                f"project state schema_version {version} requires migration "
                f"(engine supports {STATE_SCHEMA_VERSION})")
        return cls(
            project_id=payload["project_id"],
            interest=payload["interest"],
            seeds=list(payload.get("seeds", [])),
            directions=list(payload.get("directions", [])),
            chosen_direction=payload.get("chosen_direction"),
            queries=list(payload.get("queries", [])),
            venues=list(payload.get("venues", [])),
            contribution_track=payload.get("contribution_track"),
            approved_gap=payload.get("approved_gap"),
            phase=Phase(payload["phase"]),
            phase_work_done=bool(payload.get("phase_work_done", False)),
            pending=[PendingDecision.from_dict(d) for d in payload.get("pending", [])],
            decision_log=list(payload.get("decision_log", [])),
            budget=Budget.from_dict(payload["budget"]),
            rwm_path=payload.get("rwm_path", ""),
            records=dict(payload.get("records", {})),
            consensus_state=payload.get("consensus_state"),
            review_cycles=int(payload.get("review_cycles", 0)),
            created_at=payload.get("created_at", ""),
            updated_at=payload.get("updated_at", ""),
        )
