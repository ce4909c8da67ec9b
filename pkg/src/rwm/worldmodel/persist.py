"""Canonical-JSON persistence for the world model (.rwm.json files).

The on-disk form is byte-stable: sorted keys, compact separators, ASCII.
Saving an unchanged model twice yields identical bytes, which keeps model
files diffable and makes persistence testable by equality.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from ..canonical import canonical_json_bytes
from ..errors import CorruptModelError, MigrationRequiredError
from .model import SCHEMA_VERSION, WorldModel
from .types import Edge, Node

MODEL_SUFFIX = ".rwm.json"


def to_payload(wm: WorldModel) -> dict[str, Any]:
    return {
        "schema_version": wm.schema_version,
        "nodes": [wm.nodes[node_id].to_dict() for node_id in sorted(wm.nodes)],
        "edges": [wm.edges[edge_id].to_dict() for edge_id in sorted(wm.edges)],
        "uncertainty": {k: wm.uncertainty[k] for k in sorted(wm.uncertainty)},
        "provenance": {k: wm.provenance[k] for k in sorted(wm.provenance)},
    }


def from_payload(payload: dict[str, Any]) -> WorldModel:
    if not isinstance(payload, dict) or "schema_version" not in payload:
        raise CorruptModelError("payload is not a serialized world model")
    version = payload["schema_version"]
    if version != SCHEMA_VERSION:
        raise MigrationRequiredError(
            f"model schema_version {version} requires migration (engine supports {SCHEMA_VERSION})"
        )
    try:
        wm = WorldModel(schema_version=version)
        for node_payload in payload["nodes"]:
            node = Node.from_dict(node_payload)
            wm.nodes[node.id] = node
        for edge_payload in payload["edges"]:
            edge = Edge.from_dict(edge_payload)
            wm.edges[edge.id] = edge
        wm.uncertainty = {str(k): int(v) for k, v in payload["uncertainty"].items()}
        wm.provenance = {str(k): list(v) for k, v in payload["provenance"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModelError(f"malformed model payload: {exc}") from exc
    return wm


def dumps(wm: WorldModel) -> bytes:
    return canonical_json_bytes(to_payload(wm))


def save(wm: WorldModel, destination: str | Path) -> None:
    Path(destination).write_bytes(dumps(wm))


def load(source: str | Path) -> WorldModel:
    raw = Path(source).read_bytes()
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorruptModelError(f"not valid JSON: {exc}") from exc
    return from_payload(payload)
