"""Working set of the quality-gated development loop."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..canonical import normalize_text


@dataclass
class ChainLink:
    text: str
    anchors: list[str]


@dataclass
class CausalChain:
    """Five why-steps from a gap to its root mechanism; the terminal link
    states the mechanism. Every link is anchored in the world model."""

    gap_key: str
    links: list[ChainLink]

    @property
    def mechanism_text(self) -> str:
        return self.links[-1].text


@dataclass
class Mechanism:
    statement: str
    origin_field: str
    anchors: list[str] = field(default_factory=list)


@dataclass
class FieldQuery:
    name: str
    query: str


@dataclass
class FieldSet:
    fields: list[FieldQuery]

    def names(self) -> list[str]:
        return [f.name for f in self.fields]


def technique_key(field_name: str, technique_name: str) -> tuple[str, str]:
    """Identity of a searched (field, technique) pair."""
    return (normalize_text(field_name), normalize_text(technique_name))


@dataclass
class LoopState:
    iteration: int = 0
    searched: set[tuple[str, str]] = field(default_factory=set)
    tested_methods: list[dict[str, Any]] = field(default_factory=list)
    reassess_history: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "iteration": self.iteration,
            "searched": sorted(list(pair) for pair in self.searched),
            "tested_methods": list(self.tested_methods),
            "reassess_history": list(self.reassess_history),
        }


@dataclass
class GateResult:
    """Verdicts for the ten gate criteria; passes only as a conjunction."""

    criteria: dict[str, bool]
    evidence: dict[str, str]

    @property
    def passed(self) -> bool:
        return all(self.criteria.values())

    def failing(self) -> list[str]:
        return sorted(k for k, v in self.criteria.items() if not v)

    def to_rows(self) -> list[dict[str, Any]]:
        return [{"criterion": k, "passed": self.criteria[k], "evidence": self.evidence[k]}
                for k in sorted(self.criteria)]


@dataclass
class DevOutcome:
    finalized: bool
    iterations: int
    gap_id: str
    method: dict[str, Any] | None
    loop_state: LoopState
    gate_results: list[GateResult] = field(default_factory=list)
    transcript: list[dict[str, Any]] = field(default_factory=list)
