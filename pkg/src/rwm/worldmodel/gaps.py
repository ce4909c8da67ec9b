"""Gap synthesis: promote widely shared limitations to field-level gaps.

A limitation carried by at least tau_shared papers indicates a field-level
problem rather than a paper-specific weakness; it is promoted to a gap node
(gap_type "methods" by default) whose provenance records the source
limitation. Re-running is idempotent: content-addressed ids make repeated
promotions merge into the existing gap.
"""
from __future__ import annotations

from ..errors import ValidationError
from .model import WorldModel
from .types import Delta, Node, NodeKind, ProvenanceStamp

DEFAULT_TAU_SHARED = 3


def synthesize_gaps(wm: WorldModel, tau_shared: int = DEFAULT_TAU_SHARED,
                    stamp: ProvenanceStamp | None = None) -> list[Node]:
    """Promote every limitation shared by >= tau_shared papers; returns the
    committed gap nodes (existing ones included, for idempotent re-runs)."""
    if tau_shared < 1:
        raise ValidationError(f"tau_shared must be >= 1, got {tau_shared}")
    promoted: list[Node] = []
    for limitation in wm.nodes_of_kind(NodeKind.LIMITATION):
        if limitation.shared_count() < tau_shared:
            continue
        gap = Node.gap(
            description=str(limitation.attributes["description"]),
            gap_type="methods",
            severity=limitation.attributes.get("severity", "field-level"),
        )
        gap_stamp = ProvenanceStamp(
            project=stamp.project if stamp else "",
            phase=stamp.phase if stamp else "gap-synthesis",
            agent=stamp.agent if stamp else "gap-synthesis",
            timestamp=stamp.timestamp if stamp else "",
            source=limitation.id,
        )
        wm.merge(Delta(new_nodes=[gap]), stamp=gap_stamp)
        promoted.append(wm.get_node(gap.id))
    return promoted
