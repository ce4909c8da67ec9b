/** Graph view: node color by kind, border style by uncertainty (solid =
 * verified, dashed = unverified), relation labels on edges, metric vectors
 * in tooltips. All values come straight from the API payload.
 *
 * Layout is a small deterministic force simulation with a per-kind
 * cluster anchor; positions depend only on the payload, never on timing.
 */
import type { EdgePayload, GraphPayload, NodePayload } from "./types.js";

export const KIND_COLORS: Record<string, string> = {
  paper: "#4e79a7",
  method: "#f28e2b",
  module: "#59a14f",
  benchmark: "#b07aa1",
  gap: "#e15759",
  limitation: "#9c755f",
};

export interface GraphViewNode {
  id: string;
  kind: string;
  label: string;
  uncertainty: number;
  color: string;
  dashed: boolean;
  x: number;
  y: number;
  attributes: Record<string, unknown>;
}

export interface GraphViewEdge {
  id: string;
  src: string;
  dst: string;
  relation: string;
  uncertainty: number;
  tooltip: string;
}

export interface GraphView {
  nodes: GraphViewNode[];
  edges: GraphViewEdge[];
  nodeCount: number;
  edgeCount: number;
  verifiedCount: number;
  unverifiedCount: number;
}

const WIDTH = 900;
const HEIGHT = 600;
const LAYOUT_ITERATIONS = 120;

function labelOf(node: NodePayload): string {
  const attrs = node.attributes;
  const value = attrs["name"] ?? attrs["title"] ?? attrs["description"] ?? node.id;
  return String(value);
}

function metricsTooltip(edge: EdgePayload): string {
  if (edge.metrics === null) return edge.relation;
  const parts = edge.metrics.reported.map(([name, value]) => `${name}=${value}`);
  const suffix = edge.metrics.reproduction_failed ? " [reproduction failed]" : "";
  return `${edge.relation}: ${parts.join(", ")}${suffix}`;
}

/** Deterministic pseudo-random in [0, 1) from a string. */
function hash01(text: string): number {
  let h = 2166136261;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return (h >>> 0) / 4294967296;
}

function clusterAnchor(kind: string, kinds: string[]): [number, number] {
  const index = Math.max(0, kinds.indexOf(kind));
  const angle = (2 * Math.PI * index) / Math.max(1, kinds.length);
  return [
    WIDTH / 2 + 0.3 * WIDTH * Math.cos(angle),
    HEIGHT / 2 + 0.3 * HEIGHT * Math.sin(angle),
  ];
}

function layout(nodes: GraphViewNode[], edges: GraphViewEdge[]): void {
  const kinds = [...new Set(nodes.map((n) => n.kind))].sort();
  const index = new Map(nodes.map((n, i) => [n.id, i]));
  for (const node of nodes) {
    const [ax, ay] = clusterAnchor(node.kind, kinds);
    node.x = ax + 120 * (hash01(node.id) - 0.5);
    node.y = ay + 120 * (hash01(node.id + "#y") - 0.5);
  }
  for (let step = 0; step < LAYOUT_ITERATIONS; step++) {
    const fx = new Array(nodes.length).fill(0);
    const fy = new Array(nodes.length).fill(0);
    for (let i = 0; i < nodes.length; i++) {
      for (let j = i + 1; j < nodes.length; j++) {
        const dx = nodes[i].x - nodes[j].x;
        const dy = nodes[i].y - nodes[j].y;
        const d2 = Math.max(100, dx * dx + dy * dy);
        const push = 4000 / d2;
        const d = Math.sqrt(d2);
        fx[i] += (dx / d) * push;
        fy[i] += (dy / d) * push;
        fx[j] -= (dx / d) * push;
        fy[j] -= (dy / d) * push;
      }
    }
    for (const edge of edges) {
      const a = index.get(edge.src);
      const b = index.get(edge.dst);
      if (a === undefined || b === undefined) continue;
      const dx = nodes[b].x - nodes[a].x;
      const dy = nodes[b].y - nodes[a].y;
      const d = Math.max(10, Math.sqrt(dx * dx + dy * dy));
      const pull = 0.02 * (d - 120);
      fx[a] += (dx / d) * pull * d;
      fy[a] += (dy / d) * pull * d;
      fx[b] -= (dx / d) * pull * d;
      fy[b] -= (dy / d) * pull * d;
    }
    for (let i = 0; i < nodes.length; i++) {
      const kinds2 = kinds;
      const [ax, ay] = clusterAnchor(nodes[i].kind, kinds2);
      fx[i] += 0.01 * (ax - nodes[i].x);
      fy[i] += 0.01 * (ay - nodes[i].y);
      nodes[i].x = Math.min(WIDTH - 30, Math.max(30, nodes[i].x + 0.5 * fx[i]));
      nodes[i].y = Math.min(HEIGHT - 30, Math.max(30, nodes[i].y + 0.5 * fy[i]));
    }
  }
}

export interface GraphFilter {
  kinds?: string[];
  uncertainty?: number;
}

export function buildGraphView(payload: GraphPayload, filter: GraphFilter = {}): GraphView {
  let nodePayloads = payload.nodes;
  if (filter.kinds !== undefined) {
    const allowed = new Set(filter.kinds);
    nodePayloads = nodePayloads.filter((n) => allowed.has(n.kind));
  }
  if (filter.uncertainty !== undefined) {
    nodePayloads = nodePayloads.filter(
      (n) => payload.uncertainty[n.id] === filter.uncertainty,
    );
  }
  const kept = new Set(nodePayloads.map((n) => n.id));
  const nodes: GraphViewNode[] = nodePayloads.map((n) => ({
    id: n.id,
    kind: n.kind,
    label: labelOf(n),
    uncertainty: payload.uncertainty[n.id],
    color: KIND_COLORS[n.kind] ?? "#bab0ac",
    dashed: payload.uncertainty[n.id] === 1,
    x: 0,
    y: 0,
    attributes: n.attributes,
  }));
  const edges: GraphViewEdge[] = payload.edges
    .filter((e) => kept.has(e.src) && kept.has(e.dst))
    .map((e) => ({
      id: e.id,
      src: e.src,
      dst: e.dst,
      relation: e.relation,
      uncertainty: payload.uncertainty[e.id],
      tooltip: metricsTooltip(e),
    }));
  layout(nodes, edges);
  const verified = Object.values(payload.uncertainty).filter((u) => u === 0).length;
  return {
    nodes,
    edges,
    nodeCount: payload.nodes.length,
    edgeCount: payload.edges.length,
    verifiedCount: verified,
    unverifiedCount: Object.keys(payload.uncertainty).length - verified,
  };
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Render the view as standalone SVG markup (testable without a DOM). */
export function renderGraphSvg(view: GraphView): string {
  const byId = new Map(view.nodes.map((n) => [n.id, n]));
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" class="graph-view">`,
  ];
  for (const edge of view.edges) {
    const a = byId.get(edge.src);
    const b = byId.get(edge.dst);
    if (!a || !b) continue;
    parts.push(
      `<g class="edge" data-edge-id="${escapeXml(edge.id)}">` +
        `<line x1="${a.x.toFixed(1)}" y1="${a.y.toFixed(1)}" ` +
        `x2="${b.x.toFixed(1)}" y2="${b.y.toFixed(1)}" stroke="#999" ` +
        `stroke-dasharray="${edge.uncertainty === 1 ? "4 3" : "none"}">` +
        `<title>${escapeXml(edge.tooltip)}</title></line>` +
        `<text x="${((a.x + b.x) / 2).toFixed(1)}" y="${((a.y + b.y) / 2).toFixed(1)}" ` +
        `font-size="9" fill="#666">${escapeXml(edge.relation)}</text></g>`,
    );
  }
  for (const node of view.nodes) {
    parts.push(
      `<g class="node" data-node-id="${escapeXml(node.id)}" data-kind="${node.kind}" ` +
        `data-uncertainty="${node.uncertainty}">` +
        `<circle cx="${node.x.toFixed(1)}" cy="${node.y.toFixed(1)}" r="14" ` +
        `fill="${node.color}" stroke="#222" stroke-width="2" ` +
        `stroke-dasharray="${node.dashed ? "5 3" : "none"}"/>` +
        `<text x="${node.x.toFixed(1)}" y="${(node.y + 26).toFixed(1)}" ` +
        `font-size="10" text-anchor="middle">${escapeXml(node.label)}</text></g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

/** Detail pane for a clicked node: attributes exactly as served. */
export function renderNodeDetail(view: GraphView, nodeId: string): string {
  const node = view.nodes.find((n) => n.id === nodeId);
  if (!node) return `<div class="detail empty">no node selected</div>`;
  const rows = Object.entries(node.attributes)
    .map(
      ([key, value]) =>
        `<tr><td>${escapeXml(key)}</td><td>${escapeXml(JSON.stringify(value))}</td></tr>`,
    )
    .join("");
  return (
    `<div class="detail" data-node-id="${escapeXml(node.id)}">` +
    `<h3>${escapeXml(node.label)}</h3>` +
    `<p>kind: ${node.kind}, uncertainty: ${node.uncertainty}</p>` +
    `<table>${rows}</table></div>`
  );
}
