"""Typed elements of the research world model graph.

Node identity is content-addressed: the id is derived from (kind, canonical
key), where the key is the normalized name (Paper: title; Method, Module,
Benchmark: name; Gap, Limitation: description). Two agents describing the
same element in different sessions therefore produce the same id, which is
what makes deltas mergeable without an embedding model.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

from ..canonical import normalize_text, slugify
from ..errors import ValidationError


class NodeKind(str, Enum):
    PAPER = "paper"
    METHOD = "method"
    MODULE = "module"
    BENCHMARK = "benchmark"
    GAP = "gap"
    LIMITATION = "limitation"


class Relation(str, Enum):
    PROPOSES = "proposes"
    USES = "uses"
    EVALUATED_ON = "evaluated_on"
    HAS_LIMITATION = "has_limitation"
    CAUSES = "causes"
    SOLVES = "solves"
    EQUIVALENT_TO = "equivalent_to"


# (src kind, dst kind) permitted per relation; metrics ride only on evaluated_on.
EDGE_SIGNATURES: dict[Relation, tuple[NodeKind, NodeKind]] = {
    Relation.PROPOSES: (NodeKind.PAPER, NodeKind.METHOD),
    Relation.USES: (NodeKind.METHOD, NodeKind.MODULE),
    Relation.EVALUATED_ON: (NodeKind.METHOD, NodeKind.BENCHMARK),
    Relation.HAS_LIMITATION: (NodeKind.METHOD, NodeKind.LIMITATION),
    Relation.CAUSES: (NodeKind.MODULE, NodeKind.GAP),
    Relation.SOLVES: (NodeKind.METHOD, NodeKind.GAP),
    Relation.EQUIVALENT_TO: (NodeKind.MODULE, NodeKind.MODULE),
}

MODULE_TYPES = ("loss", "architecture", "training", "data", "inference")
GAP_TYPES = ("methods", "benchmark", "position")

# Which attribute carries the canonical identity key, per kind.
_KEY_FIELD: dict[NodeKind, str] = {
    NodeKind.PAPER: "title",
    NodeKind.METHOD: "name",
    NodeKind.MODULE: "name",
    NodeKind.BENCHMARK: "name",
    NodeKind.GAP: "description",
    NodeKind.LIMITATION: "description",
}

UNVERIFIED = 1
VERIFIED = 0

# Relative disagreement between a reported and re-measured metric value
# beyond which the edge is marked reproduction_failed.
REPRODUCTION_TOLERANCE = 0.05


def node_id_for(kind: NodeKind, key_value: str) -> str:
    return f"{kind.value}:{slugify(key_value)}"


def edge_id_for(src: str, relation: Relation, dst: str) -> str:
    return f"{src}|{relation.value}|{dst}"


@dataclass
class MetricVector:
    """Metric entries attached to an evaluated_on edge.

    ``reported`` holds the originally published values and is never
    overwritten; a reproduction stores its numbers in ``measured`` alongside.
    A measured value off by more than REPRODUCTION_TOLERANCE (relative)
    raises the ``reproduction_failed`` flag instead of touching the
    element's uncertainty state, which is one-way by design.
    """

    reported: list[tuple[str, float]]
    measured: list[tuple[str, float]] | None = None
    reproduction_failed: bool = False

    def __post_init__(self) -> None:
        if not self.reported:
            raise ValidationError("metric vector must carry at least one entry")
        names = [name for name, _ in self.reported]
        if len(names) != len(set(names)):
            raise ValidationError(f"duplicate metric names in {names}")
        self.reported = [(str(n), float(v)) for n, v in self.reported]
        if self.measured is not None:
            self.measured = [(str(n), float(v)) for n, v in self.measured]

    @property
    def entries(self) -> list[tuple[str, float]]:
        return list(self.reported)

    def to_dict(self) -> dict[str, Any]:
        return {
            "reported": [[n, v] for n, v in self.reported],
            "measured": None if self.measured is None else [[n, v] for n, v in self.measured],
            "reproduction_failed": self.reproduction_failed,
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "MetricVector":
        measured = payload.get("measured")
        return cls(
            reported=[(n, v) for n, v in payload["reported"]],
            measured=None if measured is None else [(n, v) for n, v in measured],
            reproduction_failed=bool(payload.get("reproduction_failed", False)),
        )


def _validate_attributes(kind: NodeKind, attributes: dict[str, Any]) -> None:
    key_field = _KEY_FIELD[kind]
    key_value = attributes.get(key_field)
    if not isinstance(key_value, str) or not normalize_text(key_value):
        raise ValidationError(f"{kind.value} node requires nonempty '{key_field}'")
    if kind is NodeKind.MODULE:
        module_type = attributes.get("module_type")
        if module_type not in MODULE_TYPES:
            raise ValidationError(
                f"module_type {module_type!r} not in {MODULE_TYPES}"
            )
    if kind is NodeKind.GAP:
        gap_type = attributes.get("gap_type", "methods")
        if gap_type not in GAP_TYPES:
            raise ValidationError(f"gap_type {gap_type!r} not in {GAP_TYPES}")
        attributes.setdefault("gap_type", gap_type)
    if kind is NodeKind.LIMITATION:
        papers = attributes.get("papers", [])
        if not isinstance(papers, (list, set, tuple, frozenset)):
            raise ValidationError("limitation 'papers' must be a collection of node ids")
        attributes["papers"] = sorted(set(str(p) for p in papers))
    if kind is NodeKind.PAPER:
        year = attributes.get("year")
        if year is not None and not (1950 <= int(year) <= 2100):
            raise ValidationError(f"implausible paper year {year!r}")


@dataclass
class Node:
    """A typed node. ``attribute_history`` keeps superseded values append-only."""

    id: str
    kind: NodeKind
    attributes: dict[str, Any]
    attribute_history: dict[str, list[Any]] = field(default_factory=dict)

    @classmethod
    def create(cls, kind: NodeKind, **attributes: Any) -> "Node":
        attrs = dict(attributes)
        _validate_attributes(kind, attrs)
        key_value = attrs[_KEY_FIELD[kind]]
        return cls(id=node_id_for(kind, key_value), kind=kind, attributes=attrs)

    # Per-kind constructors keep call sites readable.
    @classmethod
    def paper(cls, title: str, **attrs: Any) -> "Node":
        return cls.create(NodeKind.PAPER, title=title, **attrs)

    @classmethod
    def method(cls, name: str, **attrs: Any) -> "Node":
        return cls.create(NodeKind.METHOD, name=name, **attrs)

    @classmethod
    def module(cls, name: str, module_type: str, **attrs: Any) -> "Node":
        return cls.create(NodeKind.MODULE, name=name, module_type=module_type, **attrs)

    @classmethod
    def benchmark(cls, name: str, **attrs: Any) -> "Node":
        return cls.create(NodeKind.BENCHMARK, name=name, **attrs)

    @classmethod
    def gap(cls, description: str, gap_type: str = "methods", **attrs: Any) -> "Node":
        return cls.create(NodeKind.GAP, description=description, gap_type=gap_type, **attrs)

    @classmethod
    def limitation(cls, description: str, papers: Iterable[str] = (), **attrs: Any) -> "Node":
        return cls.create(NodeKind.LIMITATION, description=description, papers=list(papers), **attrs)

    @property
    def canonical_key(self) -> str:
        return normalize_text(str(self.attributes[_KEY_FIELD[self.kind]]))

    @property
    def name(self) -> str:
        return str(self.attributes[_KEY_FIELD[self.kind]])

    def shared_count(self) -> int:
        if self.kind is not NodeKind.LIMITATION:
            raise ValidationError("shared_count is defined for limitation nodes only")
        return len(self.attributes.get("papers", []))

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "attributes": self.attributes,
            "attribute_history": self.attribute_history,
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "Node":
        return cls(
            id=payload["id"],
            kind=NodeKind(payload["kind"]),
            attributes=dict(payload["attributes"]),
            attribute_history={k: list(v) for k, v in payload.get("attribute_history", {}).items()},
        )


@dataclass
class Edge:
    id: str
    src: str
    relation: Relation
    dst: str
    metrics: MetricVector | None = None

    @classmethod
    def create(cls, src: str, relation: Relation, dst: str,
               metrics: MetricVector | None = None) -> "Edge":
        return cls(id=edge_id_for(src, relation, dst), src=src,
                   relation=relation, dst=dst, metrics=metrics)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "src": self.src,
            "relation": self.relation.value,
            "dst": self.dst,
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "Edge":
        metrics = payload.get("metrics")
        return cls(
            id=payload["id"],
            src=payload["src"],
            relation=Relation(payload["relation"]),
            dst=payload["dst"],
            metrics=None if metrics is None else MetricVector.from_dict(metrics),
        )


@dataclass
class ProvenanceStamp:
    """Where a committed delta came from: one record per touched element."""

    project: str = ""
    phase: str = ""
    agent: str = ""
    timestamp: str = ""
    source: str | None = None

    def to_dict(self) -> dict[str, Any]:
        record: dict[str, Any] = {
            "project": self.project,
            "phase": self.phase,
            "agent": self.agent,
            "timestamp": self.timestamp,
        }
        if self.source is not None:
            record["source"] = self.source
        return record


@dataclass
class Delta:
    """An atomic batch of additions plus verification marks."""

    new_nodes: list[Node] = field(default_factory=list)
    new_edges: list[Edge] = field(default_factory=list)
    verifications: list[str] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not (self.new_nodes or self.new_edges or self.verifications)

    def element_ids(self) -> list[str]:
        return ([n.id for n in self.new_nodes]
                + [e.id for e in self.new_edges]
                + list(self.verifications))
