"""Message types of the two-round probing protocol."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..canonical import normalize_text

PROBE_PERSPECTIVES = ("method-failure", "benchmark-coverage", "assumption-challenging")

CORROBORATION_THRESHOLD = 2  # proposers needed for a gap to land verified


@dataclass
class AgentSpec:
    """A probing agent identity plus the perspective it covers."""

    agent_id: str
    perspective: str = PROBE_PERSPECTIVES[0]


@dataclass
class GapCandidate:
    description: str
    gap_type: str = "methods"
    evidence: list[str] = field(default_factory=list)
    proposer: str = ""
    round: int = 1

    @property
    def canonical_key(self) -> str:
        return normalize_text(self.description)

    def to_dict(self) -> dict[str, Any]:
        return {
            "description": self.description,
            "gap_type": self.gap_type,
            "evidence": list(self.evidence),
            "proposer": self.proposer,
            "round": self.round,
        }


@dataclass
class TaskProposal:
    description: str
    kind: str  # new_direction | combine_findings | redirect_agent
    targets: list[str] = field(default_factory=list)
    proposer: str = ""
    task_id: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "description": self.description,
            "kind": self.kind,
            "targets": list(self.targets),
            "proposer": self.proposer,
        }


@dataclass
class OrchestratorDecision:
    action: str  # merge | kill | redirect | continue
    subject: list[str]  # gap keys or task ids covered by this decision
    rationale: str = ""
    merged_description: str | None = None
    redirect_to: str | None = None

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "action": self.action,
            "subject": list(self.subject),
            "rationale": self.rationale,
        }
        if self.merged_description is not None:
            payload["merged_description"] = self.merged_description
        if self.redirect_to is not None:
            payload["redirect_to"] = self.redirect_to
        return payload


@dataclass
class CorroboratedGap:
    key: str
    description: str
    gap_type: str
    uncertainty: int
    multiplicity: int
    proposers: list[str]
    evidence: list[str]

    def to_dict(self) -> dict[str, Any]:
        return {
            "key": self.key,
            "description": self.description,
            "gap_type": self.gap_type,
            "uncertainty": self.uncertainty,
            "multiplicity": self.multiplicity,
            "proposers": list(self.proposers),
            "evidence": list(self.evidence),
        }


@dataclass
class ConsensusResult:
    verified_gaps: list[CorroboratedGap]
    approved_tasks: list[TaskProposal]
    decisions: list[OrchestratorDecision]
    rounds_executed: int
    quiescent: bool
    transcript: list[dict[str, Any]] = field(default_factory=list)

    def write_transcript_jsonl(self, destination) -> None:
        """One ordered event per line: rounds, findings, decisions."""
        import json
        from pathlib import Path

        lines = [json.dumps(event, sort_keys=True, ensure_ascii=True)
                 for event in self.transcript]
        Path(destination).write_text("\n".join(lines) + "\n", encoding="utf-8")
