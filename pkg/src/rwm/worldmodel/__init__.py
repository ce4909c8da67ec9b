"""The persistent, uncertainty-annotated research world model."""
from .types import (
    EDGE_SIGNATURES,
    GAP_TYPES,
    MODULE_TYPES,
    UNVERIFIED,
    VERIFIED,
    Delta,
    Edge,
    MetricVector,
    Node,
    NodeKind,
    ProvenanceStamp,
    Relation,
    edge_id_for,
    node_id_for,
)
from .model import SCHEMA_VERSION, WorldModel, create_empty, delta_from
from .dedup import (
    DEFAULT_THETA,
    DedupClass,
    DedupReport,
    UnionFind,
    brute_force_classes,
    dedup_modules,
    default_similarity,
)
from .gaps import DEFAULT_TAU_SHARED, synthesize_gaps
from .queries import (
    cross_links,
    gap_nodes,
    limitations_of,
    missing_evaluations,
    neighbors,
    run_query,
    shared_modules,
)
from .persist import MODEL_SUFFIX, dumps, load, save, to_payload
from .graphml import export_graphml, to_graphml

__all__ = [
    "EDGE_SIGNATURES", "GAP_TYPES", "MODULE_TYPES", "UNVERIFIED", "VERIFIED",
    "Delta", "Edge", "MetricVector", "Node", "NodeKind", "ProvenanceStamp",
    "Relation", "edge_id_for", "node_id_for",
    "SCHEMA_VERSION", "WorldModel", "create_empty", "delta_from",
    "DEFAULT_THETA", "DedupClass", "DedupReport", "UnionFind",
    "brute_force_classes", "dedup_modules", "default_similarity",
    "DEFAULT_TAU_SHARED", "synthesize_gaps",
    "cross_links", "gap_nodes", "limitations_of", "missing_evaluations",
    "neighbors", "run_query", "shared_modules",
    "MODEL_SUFFIX", "dumps", "load", "save", "to_payload",
    "export_graphml", "to_graphml",
]
