"""The persistent world model store.

All mutation goes through a single committer lock; readers work on
immutable snapshots. Commits are atomic: a delta is validated in full
before anything is applied, and element counts never decrease across a
committed operation. Verification (uncertainty 1 -> 0) is one-way; a delta
claiming an already-verified element is unverified is silently outranked
by the min-combination rule.
"""
from __future__ import annotations

import copy
import threading
from typing import Any, Iterable

from ..errors import (
    DeltaError,
    DuplicateNodeError,
    FrozenModelError,
    UnknownElementError,
    ValidationError,
)
from .types import (
    EDGE_SIGNATURES,
    REPRODUCTION_TOLERANCE,
    UNVERIFIED,
    VERIFIED,
    Delta,
    Edge,
    MetricVector,
    Node,
    NodeKind,
    ProvenanceStamp,
    Relation,
)

SCHEMA_VERSION = 1


class WorldModel:
    def __init__(self, schema_version: int = SCHEMA_VERSION):
        self.schema_version = schema_version
        self.nodes: dict[str, Node] = {}
        self.edges: dict[str, Edge] = {}
        self.uncertainty: dict[str, int] = {}
        self.provenance: dict[str, list[dict[str, Any]]] = {}
        self._frozen = False
        self._commit_lock = threading.Lock()

    # -- construction ------------------------------------------------------

    @classmethod
    def empty(cls) -> "WorldModel":
        return cls()

    def snapshot(self) -> "WorldModel":
        """Immutable deep copy handed to concurrent readers."""
        with self._commit_lock:
            clone = WorldModel(schema_version=self.schema_version)
            clone.nodes = copy.deepcopy(self.nodes)
            clone.edges = copy.deepcopy(self.edges)
            clone.uncertainty = dict(self.uncertainty)
            clone.provenance = copy.deepcopy(self.provenance)
            clone._frozen = True
            return clone

    def _require_mutable(self) -> None:
        if self._frozen:
            raise FrozenModelError("snapshot views are read-only")

    # -- basic mutation ----------------------------------------------------

    def add_node(self, node: Node) -> str:
        """Insert a brand-new node (uncertainty starts at 1). Re-adding an
        existing canonical key is a caller bug; use merge() to union."""
        self._require_mutable()
        with self._commit_lock:
            if node.id in self.nodes:
                raise DuplicateNodeError(f"node {node.id} already present")
            self.nodes[node.id] = copy.deepcopy(node)
            self.uncertainty[node.id] = UNVERIFIED
            self.provenance.setdefault(node.id, [])
            return node.id

    def add_edge(self, src: str, relation: Relation, dst: str,
                 metrics: MetricVector | None = None) -> str:
        self._require_mutable()
        with self._commit_lock:
            edge = self._build_edge(src, relation, dst, metrics)
            if edge.id in self.edges:
                raise DuplicateNodeError(f"edge {edge.id} already present")
            self.edges[edge.id] = edge
            self.uncertainty[edge.id] = UNVERIFIED
            self.provenance.setdefault(edge.id, [])
            return edge.id

    def _build_edge(self, src: str, relation: Relation, dst: str,
                    metrics: MetricVector | None) -> Edge:
        if src not in self.nodes:
            raise UnknownElementError(f"edge source {src} not in model")
        if dst not in self.nodes:
            raise UnknownElementError(f"edge target {dst} not in model")
        self._check_signature(self.nodes[src].kind, relation, self.nodes[dst].kind)
        if relation is Relation.EVALUATED_ON:
            if metrics is None:
                raise ValidationError("evaluated_on edges require a metric vector")
        elif metrics is not None:
            raise ValidationError(f"metrics are not allowed on {relation.value} edges")
        return Edge.create(src, relation, dst, metrics=copy.deepcopy(metrics))

    @staticmethod
    def _check_signature(src_kind: NodeKind, relation: Relation, dst_kind: NodeKind) -> None:
        from ..errors import SignatureError

        expected = EDGE_SIGNATURES[relation]
        if (src_kind, dst_kind) != expected:
            raise SignatureError(
                f"{relation.value} requires {expected[0].value}->{expected[1].value}, "
                f"got {src_kind.value}->{dst_kind.value}"
            )

    def verify(self, element_id: str) -> None:
        """Mark an element verified. Idempotent; never reversible."""
        self._require_mutable()
        with self._commit_lock:
            if element_id not in self.uncertainty:
                raise UnknownElementError(f"no element {element_id}")
            self.uncertainty[element_id] = VERIFIED

    # -- the merge operator --------------------------------------------------

    def merge(self, delta: Delta, stamp: ProvenanceStamp | None = None) -> dict[str, int]:
        """Union a delta into the model.

        Uncertainty combines by min, so verified elements stay verified no
        matter what the delta claims. Existing nodes touched by the delta
        keep their current attribute values; differing incoming values are
        appended to the attribute history, and limitation paper sets union.
        Returns a small summary for event logs.
        """
        self._require_mutable()
        with self._commit_lock:
            return self._merge_locked(delta, stamp)

    def _merge_locked(self, delta: Delta, stamp: ProvenanceStamp | None) -> dict[str, int]:
        # Validate everything before applying anything (atomic commit).
        node_ids_after = set(self.nodes) | {n.id for n in delta.new_nodes}
        staged_edges: list[Edge] = []
        for edge in delta.new_edges:
            if edge.src not in node_ids_after:
                raise DeltaError(f"delta edge {edge.id} has missing source {edge.src}")
            if edge.dst not in node_ids_after:
                raise DeltaError(f"delta edge {edge.id} has missing target {edge.dst}")
            src_kind = self._kind_after(edge.src, delta)
            dst_kind = self._kind_after(edge.dst, delta)
            self._check_signature(src_kind, edge.relation, dst_kind)
            if edge.relation is Relation.EVALUATED_ON and edge.metrics is None:
                raise ValidationError("evaluated_on edges require a metric vector")
            if edge.relation is not Relation.EVALUATED_ON and edge.metrics is not None:
                raise ValidationError(f"metrics are not allowed on {edge.relation.value} edges")
            staged_edges.append(edge)
        element_ids_after = node_ids_after | set(self.edges) | {e.id for e in staged_edges}
        for element_id in delta.verifications:
            if element_id not in element_ids_after:
                raise DeltaError(f"verification targets unknown element {element_id}")

        nodes_added = edges_added = 0
        touched: set[str] = set()
        for node in sorted(delta.new_nodes, key=lambda n: n.id):
            touched.add(node.id)
            existing = self.nodes.get(node.id)
            if existing is None:
                self.nodes[node.id] = copy.deepcopy(node)
                self.uncertainty.setdefault(node.id, UNVERIFIED)
                nodes_added += 1
            else:
                self._merge_node_attributes(existing, node)
        for edge in sorted(staged_edges, key=lambda e: e.id):
            touched.add(edge.id)
            existing_edge = self.edges.get(edge.id)
            if existing_edge is None:
                self.edges[edge.id] = copy.deepcopy(edge)
                self.uncertainty.setdefault(edge.id, UNVERIFIED)
                edges_added += 1
            elif edge.metrics is not None and existing_edge.metrics is None:
                existing_edge.metrics = copy.deepcopy(edge.metrics)
        verified = 0
        for element_id in sorted(set(delta.verifications)):
            touched.add(element_id)
            if self.uncertainty.get(element_id, UNVERIFIED) != VERIFIED:
                verified += 1
            # min(U_old, delta U=0)
            self.uncertainty[element_id] = VERIFIED
        if stamp is not None:
            record = stamp.to_dict()
            for element_id in sorted(touched):
                self.provenance.setdefault(element_id, []).append(dict(record))
        else:
            for element_id in sorted(touched):
                self.provenance.setdefault(element_id, [])
        return {
            "nodes_added": nodes_added,
            "edges_added": edges_added,
            "verified": verified,
            "node_total": len(self.nodes),
            "edge_total": len(self.edges),
        }

    def _kind_after(self, node_id: str, delta: Delta) -> NodeKind:
        if node_id in self.nodes:
            return self.nodes[node_id].kind
        for node in delta.new_nodes:
            if node.id == node_id:
                return node.kind
        raise DeltaError(f"unknown node {node_id}")  # unreachable after validation

    @staticmethod
    def _merge_node_attributes(existing: Node, incoming: Node) -> None:
        if existing.kind is not incoming.kind:
            raise DeltaError(f"kind conflict for {existing.id}")
        for key, value in incoming.attributes.items():
            if key == "papers" and existing.kind is NodeKind.LIMITATION:
                union = set(existing.attributes.get("papers", [])) | set(value)
                existing.attributes["papers"] = sorted(union)
            elif key not in existing.attributes:
                existing.attributes[key] = copy.deepcopy(value)
            elif existing.attributes[key] != value:
                existing.attribute_history.setdefault(key, []).append(copy.deepcopy(value))

    # -- reproduction bookkeeping -------------------------------------------

    def record_measurement(self, edge_id: str, measured: list[tuple[str, float]]) -> bool:
        """Store re-measured metric values next to the reported ones.

        Returns True when the reproduction disagrees beyond tolerance, in
        which case the edge's reproduction_failed flag is set (uncertainty
        is left alone: 0 -> 1 transitions do not exist).
        """
        self._require_mutable()
        with self._commit_lock:
            edge = self.edges.get(edge_id)
            if edge is None:
                raise UnknownElementError(f"no edge {edge_id}")
            if edge.metrics is None:
                raise ValidationError(f"edge {edge_id} carries no metrics")
            edge.metrics.measured = [(str(n), float(v)) for n, v in measured]
            reported = dict(edge.metrics.reported)
            failed = False
            for name, value in edge.metrics.measured:
                if name not in reported:
                    continue
                ref = reported[name]
                scale = max(abs(ref), 1e-12)
                if abs(value - ref) / scale > REPRODUCTION_TOLERANCE:
                    failed = True
            if failed:
                edge.metrics.reproduction_failed = True
            return failed

    # -- introspection -------------------------------------------------------

    def node_count(self) -> int:
        return len(self.nodes)

    def edge_count(self) -> int:
        return len(self.edges)

    def nodes_of_kind(self, kind: NodeKind) -> list[Node]:
        return sorted((n for n in self.nodes.values() if n.kind is kind), key=lambda n: n.id)

    def edges_of(self, relation: Relation) -> list[Edge]:
        return sorted((e for e in self.edges.values() if e.relation is relation), key=lambda e: e.id)

    def get_node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownElementError(f"no node {node_id}") from None

    def has_element(self, element_id: str) -> bool:
        return element_id in self.uncertainty

    def uncertainty_of(self, element_id: str) -> int:
        try:
            return self.uncertainty[element_id]
        except KeyError:
            raise UnknownElementError(f"no element {element_id}") from None

    def papers_of_module(self, module_id: str) -> set[str]:
        """Distinct papers whose methods use the given module."""
        methods = {e.src for e in self.edges.values()
                   if e.relation is Relation.USES and e.dst == module_id}
        return {e.src for e in self.edges.values()
                if e.relation is Relation.PROPOSES and e.dst in methods}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WorldModel):
            return NotImplemented
        return (
            self.schema_version == other.schema_version
            and {k: v.to_dict() for k, v in self.nodes.items()}
            == {k: v.to_dict() for k, v in other.nodes.items()}
            and {k: v.to_dict() for k, v in self.edges.items()}
            == {k: v.to_dict() for k, v in other.edges.items()}
            and self.uncertainty == other.uncertainty
            and self.provenance == other.provenance
        )

    def __repr__(self) -> str:
        return f"WorldModel(nodes={len(self.nodes)}, edges={len(self.edges)})"


def create_empty() -> WorldModel:
    return WorldModel.empty()


def delta_from(nodes: Iterable[Node] = (), edges: Iterable[Edge] = (),
               verifications: Iterable[str] = ()) -> Delta:
    return Delta(new_nodes=list(nodes), new_edges=list(edges),
                 verifications=list(verifications))
