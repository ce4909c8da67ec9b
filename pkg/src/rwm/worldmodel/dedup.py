"""Module deduplication via similarity clustering.

Pairwise similarity above theta is not transitive, so equivalence classes
are its transitive closure, computed with union-find. The canonical member
of each class is the one appearing in the most papers (ties broken by
lexicographically smallest name); every alias gets an equivalent_to edge
pointing at the canonical. Classes with three or more members are flagged
as shared building blocks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..canonical import jaccard
from ..errors import ValidationError
from .model import WorldModel
from .types import Delta, Edge, Node, NodeKind, ProvenanceStamp, Relation

SHARED_CLASS_MIN = 3
DEFAULT_THETA = 0.85

SimilarityFn = Callable[[str, str], float]


class UnionFind:
    """Disjoint sets with path compression and union by rank."""

    def __init__(self) -> None:
        self.parent: dict[str, str] = {}
        self.rank: dict[str, int] = {}

    def find(self, x: str) -> str:
        if x not in self.parent:
            self.parent[x] = x
            self.rank[x] = 0
            return x
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: str, y: str) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1

    def classes(self) -> dict[str, list[str]]:
        grouped: dict[str, list[str]] = {}
        for member in self.parent:
            grouped.setdefault(self.find(member), []).append(member)
        return {root: sorted(members) for root, members in grouped.items()}


def default_similarity(a: str, b: str) -> float:
    """Token-set Jaccard over normalized descriptions. Callers may inject an
    embedding-based function instead."""
    return jaccard(a, b)


@dataclass
class DedupClass:
    canonical: str
    members: list[str]
    shared: bool

    def aliases(self) -> list[str]:
        return [m for m in self.members if m != self.canonical]


@dataclass
class DedupReport:
    classes: list[DedupClass] = field(default_factory=list)
    equivalent_edges: list[str] = field(default_factory=list)

    @property
    def shared_classes(self) -> list[DedupClass]:
        return [c for c in self.classes if c.shared]


def dedup_modules(wm: WorldModel, similarity: SimilarityFn | None = None,
                  theta: float = DEFAULT_THETA,
                  stamp: ProvenanceStamp | None = None) -> DedupReport:
    """Partition module nodes into equivalence classes and commit
    equivalent_to edges from every alias to its canonical representative."""
    if not 0.0 <= theta <= 1.0:
        raise ValidationError(f"theta must be in [0, 1], got {theta}")
    sim = similarity or default_similarity
    modules = wm.nodes_of_kind(NodeKind.MODULE)
    if not modules:
        return DedupReport()

    uf = UnionFind()
    for node in modules:
        uf.find(node.id)
    descriptions = {n.id: str(n.attributes.get("description", n.name)) for n in modules}
    ids = [n.id for n in modules]
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if sim(descriptions[a], descriptions[b]) > theta:
                uf.union(a, b)

    report = DedupReport()
    new_edges: list[Edge] = []
    for members in sorted(uf.classes().values()):
        canonical = _pick_canonical(wm, members)
        cls = DedupClass(canonical=canonical, members=members,
                         shared=len(members) >= SHARED_CLASS_MIN)
        report.classes.append(cls)
        for alias in cls.aliases():
            edge = Edge.create(alias, Relation.EQUIVALENT_TO, canonical)
            if edge.id not in wm.edges:
                new_edges.append(edge)
            report.equivalent_edges.append(edge.id)
    if new_edges:
        wm.merge(Delta(new_edges=new_edges), stamp=stamp)
    return report


def _pick_canonical(wm: WorldModel, members: list[str]) -> str:
    def key(module_id: str) -> tuple[int, str]:
        node = wm.get_node(module_id)
        # max papers first, then lexicographically smallest name
        return (-len(wm.papers_of_module(module_id)), node.name.lower())

    return sorted(members, key=key)[0]


def brute_force_classes(items: dict[str, str], sim: SimilarityFn, theta: float) -> list[list[str]]:
    """Independent oracle: transitive closure over all pairs by repeated
    sweeps, no union-find. Used by tests to cross-check dedup_modules."""
    classes: list[set[str]] = [{i} for i in items]
    changed = True
    while changed:
        changed = False
        for i in range(len(classes)):
            for j in range(i + 1, len(classes)):
                if any(sim(items[a], items[b]) > theta
                       for a in classes[i] for b in classes[j]):
                    classes[i] |= classes[j]
                    del classes[j]
                    changed = True
                    break
            if changed:
                break
    return sorted(sorted(c) for c in classes)
