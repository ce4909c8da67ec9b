"""GraphML export for interchange with external graph tools.

Node elements carry kind, display name, and uncertainty (as 0/1 integers);
edge elements carry the relation, uncertainty, and any metric vector as a
JSON string. The writer is hand-rolled on ElementTree so tests can verify
it against an independent GraphML reader.
"""
from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from pathlib import Path

from .model import WorldModel

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"

_NODE_KEYS = [
    ("kind", "string"),
    ("label", "string"),
    ("uncertainty", "int"),
    ("attributes", "string"),
]
_EDGE_KEYS = [
    ("relation", "string"),
    ("uncertainty", "int"),
    ("metrics", "string"),
]


def to_graphml(wm: WorldModel) -> str:
    ET.register_namespace("", GRAPHML_NS)
    root = ET.Element(f"{{{GRAPHML_NS}}}graphml")
    key_ids: dict[tuple[str, str], str] = {}
    counter = 0
    for domain, keys in (("node", _NODE_KEYS), ("edge", _EDGE_KEYS)):
        for name, attr_type in keys:
            key_id = f"d{counter}"
            counter += 1
            key_ids[(domain, name)] = key_id
            ET.SubElement(root, f"{{{GRAPHML_NS}}}key", {
                "id": key_id, "for": domain, "attr.name": name, "attr.type": attr_type,
            })

    graph = ET.SubElement(root, f"{{{GRAPHML_NS}}}graph",
                          {"id": "rwm", "edgedefault": "directed"})

    def data(parent: ET.Element, domain: str, name: str, value: str) -> None:
        el = ET.SubElement(parent, f"{{{GRAPHML_NS}}}data", {"key": key_ids[(domain, name)]})
        el.text = value

    for node_id in sorted(wm.nodes):
        node = wm.nodes[node_id]
        el = ET.SubElement(graph, f"{{{GRAPHML_NS}}}node", {"id": node_id})
        data(el, "node", "kind", node.kind.value)
        data(el, "node", "label", node.name)
        data(el, "node", "uncertainty", str(wm.uncertainty_of(node_id)))
        data(el, "node", "attributes", json.dumps(node.attributes, sort_keys=True))
    for edge_id in sorted(wm.edges):
        edge = wm.edges[edge_id]
        el = ET.SubElement(graph, f"{{{GRAPHML_NS}}}edge",
                           {"id": edge_id, "source": edge.src, "target": edge.dst})
        data(el, "edge", "relation", edge.relation.value)
        data(el, "edge", "uncertainty", str(wm.uncertainty_of(edge_id)))
        if edge.metrics is not None:
            data(el, "edge", "metrics", json.dumps(edge.metrics.to_dict(), sort_keys=True))

    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"


def export_graphml(wm: WorldModel, destination: str | Path) -> None:
    Path(destination).write_text(to_graphml(wm), encoding="utf-8")
