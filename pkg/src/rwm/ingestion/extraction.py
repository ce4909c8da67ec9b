"""Phase 2a: section-specific extraction into world model deltas.

Each paper gets three sub-extractions against its own sections: methods
yield the proposed method plus its modules, results yield evaluated_on
tuples carrying the exact reported metric vector, and limitation sections
yield limitation nodes keyed to the paper. Everything lands unverified.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

from ..errors import IngestionError, ValidationError
from ..gateway import AgentGateway, AgentRequest, AgentRole, Budget
from ..worldmodel import (
    Delta,
    Edge,
    MetricVector,
    Node,
    ProvenanceStamp,
    Relation,
    WorldModel,
    dedup_modules,
    synthesize_gaps,
)
from ..worldmodel.dedup import SimilarityFn
from .records import PaperRecord

MODULE_COUNT_RANGE = (5, 15)
SECTIONS = ("methods", "results", "limitations")


@dataclass
class ExtractionResult:
    source_paper: str
    modules: list[Node] = field(default_factory=list)
    method: Node | None = None
    results: list[tuple[str, str, MetricVector]] = field(default_factory=list)
    limitations: list[Node] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def extract_paper(record: PaperRecord, gateway: AgentGateway, budget: Budget) -> ExtractionResult:
    if record.full_text is None:
        raise ValidationError(f"paper {record.title!r} has no full text to extract from")
    paper_node = Node.paper(title=record.title, venue=record.venue, year=record.year)
    result = ExtractionResult(source_paper=paper_node.id)
    payloads = {}
    for section in SECTIONS:
        response = gateway.invoke(AgentRequest(
            role=AgentRole.EXTRACTOR,
            context={
                "fixture_key": f"{record.title}::{section}",
                "title": record.title,
                "section": section,
                "text": record.full_text,
            },
            budget=budget,
        ))
        payloads[section] = response.payload

    methods_payload = payloads["methods"]
    method_name = methods_payload.get("method") or f"method of {record.title}"
    result.method = Node.method(name=method_name)
    for entry in methods_payload["modules"]:
        result.modules.append(Node.module(
            name=entry["name"],
            module_type=entry["module_type"],
            description=entry.get("description", entry["name"]),
        ))
    low, high = MODULE_COUNT_RANGE
    if not low <= len(result.modules) <= high:
        result.warnings.append(
            f"module count {len(result.modules)} outside expected range [{low}, {high}]")

    for entry in payloads["results"]["results"]:
        metrics = MetricVector(reported=sorted(entry["metrics"].items()))
        result.results.append((entry["method"], entry["benchmark"], metrics))

    for entry in payloads["limitations"]["limitations"]:
        result.limitations.append(Node.limitation(
            description=entry["description"],
            papers=[paper_node.id],
            severity=entry.get("severity", ""),
        ))
    return result


def delta_for_extraction(record: PaperRecord, extraction: ExtractionResult) -> Delta:
    """Assemble one paper's extraction into an uncommitted delta."""
    paper_node = Node.paper(title=record.title, venue=record.venue, year=record.year)
    nodes: dict[str, Node] = {paper_node.id: paper_node}
    edges: dict[str, Edge] = {}

    def put_node(node: Node) -> str:
        nodes.setdefault(node.id, node)
        return node.id

    def put_edge(edge: Edge) -> None:
        edges.setdefault(edge.id, edge)

    method_id = put_node(extraction.method)
    put_edge(Edge.create(paper_node.id, Relation.PROPOSES, method_id))
    for module in extraction.modules:
        module_id = put_node(module)
        put_edge(Edge.create(method_id, Relation.USES, module_id))
    for method_name, benchmark_name, metrics in extraction.results:
        eval_method = put_node(Node.method(name=method_name))
        bench = put_node(Node.benchmark(name=benchmark_name))
        put_edge(Edge.create(eval_method, Relation.EVALUATED_ON, bench, metrics=metrics))
    for limitation in extraction.limitations:
        limitation_id = put_node(limitation)
        put_edge(Edge.create(method_id, Relation.HAS_LIMITATION, limitation_id))
    return Delta(new_nodes=list(nodes.values()), new_edges=list(edges.values()))


@dataclass
class Phase2aResult:
    delta: Delta
    extractions: list[ExtractionResult]
    failures: list[dict[str, Any]]
    dedup_classes: int
    gaps_promoted: list[str]


def build_phase2a(wm: WorldModel, top_papers: Sequence[PaperRecord],
                  gateway: AgentGateway, budget: Budget,
                  stamp: ProvenanceStamp | None = None,
                  theta_dedup: float = 0.85, tau_shared: int = 3,
                  similarity: SimilarityFn | None = None,
                  max_papers: int = 20,
                  parallelism: int | None = None) -> Phase2aResult:
    """Extract all papers concurrently, commit exactly one merged delta,
    then deduplicate modules and synthesize field-level gaps."""
    if len(top_papers) > max_papers:
        raise ValidationError(f"{len(top_papers)} papers exceeds the {max_papers}-paper cap")
    extractions: list[ExtractionResult] = []
    failures: list[dict[str, Any]] = []
    merged = Delta()
    seen_nodes: set[str] = set()
    seen_edges: set[str] = set()

    def run_one(record: PaperRecord) -> ExtractionResult | Exception:
        try:
            return extract_paper(record, gateway, budget)
        except Exception as exc:  # collected; partial failure is tolerated
            return exc

    if top_papers:
        from concurrent.futures import ThreadPoolExecutor

        cap = max(1, parallelism or gateway.config.parallelism)
        if cap == 1 or len(top_papers) == 1:
            outcomes = [run_one(r) for r in top_papers]
        else:
            with ThreadPoolExecutor(max_workers=cap) as pool:
                outcomes = list(pool.map(run_one, top_papers))
        for record, outcome in zip(top_papers, outcomes):
            if isinstance(outcome, Exception):
                failures.append({"paper": record.title, "error": str(outcome)})
                continue
            extractions.append(outcome)
            delta = delta_for_extraction(record, outcome)
            for node in delta.new_nodes:
                if node.id not in seen_nodes:
                    seen_nodes.add(node.id)
                    merged.new_nodes.append(node)
                elif node.kind.value == "limitation":
                    merged.new_nodes.append(node)  # paper sets still union
            for edge in delta.new_edges:
                if edge.id not in seen_edges:
                    seen_edges.add(edge.id)
                    merged.new_edges.append(edge)
        if not extractions and failures:
            raise IngestionError(f"all {len(top_papers)} extractions failed: {failures}")

    wm.merge(merged, stamp=stamp)
    report = dedup_modules(wm, similarity=similarity, theta=theta_dedup, stamp=stamp)
    promoted = synthesize_gaps(wm, tau_shared=tau_shared, stamp=stamp)
    return Phase2aResult(
        delta=merged,
        extractions=extractions,
        failures=failures,
        dedup_classes=len(report.classes),
        gaps_promoted=[g.id for g in promoted],
    )
