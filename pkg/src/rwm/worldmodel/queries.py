"""Read-only structural queries over a world model.

Every query is deterministic with results ordered by node id. A small
string dispatcher (run_query) backs the HTTP API and CLI so each pattern is
reachable without importing this module.
"""
from __future__ import annotations

from typing import Any

from ..errors import UnknownElementError, ValidationError
from .model import WorldModel
from .types import NodeKind, Relation


def neighbors(wm: WorldModel, node_id: str, relation: Relation | str | None = None,
              direction: str = "out") -> list[str]:
    if node_id not in wm.nodes:
        raise UnknownElementError(f"no node {node_id}")
    if direction not in ("out", "in", "both"):
        raise ValidationError(f"direction must be out/in/both, got {direction!r}")
    rel = Relation(relation) if isinstance(relation, str) else relation
    found: set[str] = set()
    for edge in wm.edges.values():
        if rel is not None and edge.relation is not rel:
            continue
        if direction in ("out", "both") and edge.src == node_id:
            found.add(edge.dst)
        if direction in ("in", "both") and edge.dst == node_id:
            found.add(edge.src)
    return sorted(found)


def shared_modules(wm: WorldModel, min_count: int) -> list[str]:
    """Modules used by at least min_count distinct methods."""
    usage: dict[str, set[str]] = {}
    for edge in wm.edges.values():
        if edge.relation is Relation.USES:
            usage.setdefault(edge.dst, set()).add(edge.src)
    return sorted(m for m, methods in usage.items() if len(methods) >= min_count)


def limitations_of(wm: WorldModel, method_id: str) -> list[str]:
    if method_id not in wm.nodes:
        raise UnknownElementError(f"no node {method_id}")
    return sorted(e.dst for e in wm.edges.values()
                  if e.relation is Relation.HAS_LIMITATION and e.src == method_id)


def missing_evaluations(wm: WorldModel, method_id: str) -> list[str]:
    """Benchmarks evaluated by at least one other method that shares a
    module with this method, but not by this method itself."""
    if method_id not in wm.nodes:
        raise UnknownElementError(f"no node {method_id}")
    my_modules = {e.dst for e in wm.edges.values()
                  if e.relation is Relation.USES and e.src == method_id}
    peers = {e.src for e in wm.edges.values()
             if e.relation is Relation.USES and e.dst in my_modules and e.src != method_id}
    peer_benchmarks = {e.dst for e in wm.edges.values()
                       if e.relation is Relation.EVALUATED_ON and e.src in peers}
    mine = {e.dst for e in wm.edges.values()
            if e.relation is Relation.EVALUATED_ON and e.src == method_id}
    return sorted(peer_benchmarks - mine)


def cross_links(wm: WorldModel, project_a: str, project_b: str) -> list[str]:
    """Nodes whose provenance records both projects."""
    linked = []
    for node_id in wm.nodes:
        projects = {record.get("project") for record in wm.provenance.get(node_id, [])}
        if project_a in projects and project_b in projects:
            linked.append(node_id)
    return sorted(linked)


def gap_nodes(wm: WorldModel) -> list[dict[str, Any]]:
    return [
        {"id": n.id, "attributes": n.attributes, "uncertainty": wm.uncertainty_of(n.id)}
        for n in wm.nodes_of_kind(NodeKind.GAP)
    ]


QUERY_PATTERNS = ("neighbors", "shared_modules", "limitations_of",
                  "missing_evaluations", "cross_links")


def run_query(wm: WorldModel, pattern: str, **params: Any) -> list[str]:
    if pattern == "neighbors":
        return neighbors(wm, params["id"], params.get("relation"),
                         params.get("direction", "out"))
    if pattern == "shared_modules":
        return shared_modules(wm, int(params["min_count"]))
    if pattern == "limitations_of":
        return limitations_of(wm, params["method"])
    if pattern == "missing_evaluations":
        return missing_evaluations(wm, params["method"])
    if pattern == "cross_links":
        return cross_links(wm, params["project_a"], params["project_b"])
    raise ValidationError(f"unknown query pattern {pattern!r}; expected one of {QUERY_PATTERNS}")
