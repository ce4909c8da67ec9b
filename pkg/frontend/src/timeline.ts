/** Live timeline: engine events in sequence order, consensus findings
 * grouped by round, kill decisions struck through with their rationale. */
import type { EngineEvent } from "./types.js";

export interface TimelineEntry {
  seq: number;
  ts: string;
  type: string;
  text: string;
  group: string;
  killed: boolean;
}

function describe(event: EngineEvent): string {
  const p = event.payload;
  switch (event.type) {
    case "phase.started":
      return `phase ${p["phase"]} started`;
    case "phase.completed":
      return `phase ${p["phase"]} completed`;
    case "decision.pending":
      return `waiting on ${p["kind"]}`;
    case "decision.submitted":
      return `${p["kind"]} = ${p["option"]} (${p["actor"]})`;
    case "rwm.committed":
      return `model grew to ${p["node_total"]} nodes / ${p["edge_total"]} edges`;
    case "consensus.finding": {
      const gap = p["gap"] as { description?: string } | undefined;
      return `${p["agent"]} found: ${gap?.description ?? "?"}`;
    }
    case "consensus.decision": {
      const decision = p["decision"] as { action?: string; subject?: string[]; rationale?: string };
      return `${decision.action} ${JSON.stringify(decision.subject)}: ${decision.rationale ?? ""}`;
    }
    case "project.done":
      return "project complete";
    default:
      return event.type;
  }
}

function groupOf(event: EngineEvent): string {
  if (event.type.startsWith("consensus.")) {
    const round = event.payload["round"];
    const cycle = event.payload["cycle"];
    if (round !== undefined && cycle !== undefined) {
      return `Cycle ${cycle} / Round ${round}`;
    }
    if (cycle !== undefined) {
      return `Cycle ${cycle}`;
    }
    return "Consensus";
  }
  if (event.type.startsWith("devloop.")) {
    const t = event.payload["t"];
    return t !== undefined ? `Loop iteration ${t}` : "Development loop";
  }
  return "Engine";
}

function isKill(event: EngineEvent): boolean {
  if (event.type !== "consensus.decision") return false;
  const decision = event.payload["decision"] as { action?: string } | undefined;
  return decision?.action === "kill";
}

export class TimelineModel {
  private entries: TimelineEntry[] = [];
  private seen = new Set<number>();

  add(event: EngineEvent): void {
    if (this.seen.has(event.seq)) return;
    this.seen.add(event.seq);
    this.entries.push({
      seq: event.seq,
      ts: event.ts,
      type: event.type,
      text: describe(event),
      group: groupOf(event),
      killed: isKill(event),
    });
    this.entries.sort((a, b) => a.seq - b.seq);
  }

  all(): TimelineEntry[] {
    return [...this.entries];
  }

  /** Sequence audit: seq numbers present, sorted, no duplicates, no holes
   * relative to the first seen number. */
  sequenceIsContiguous(): boolean {
    if (this.entries.length === 0) return true;
    for (let i = 1; i < this.entries.length; i++) {
      if (this.entries[i].seq !== this.entries[i - 1].seq + 1) return false;
    }
    return true;
  }
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export function renderTimeline(model: TimelineModel): string {
  const groups = new Map<string, TimelineEntry[]>();
  for (const entry of model.all()) {
    const bucket = groups.get(entry.group) ?? [];
    bucket.push(entry);
    groups.set(entry.group, bucket);
  }
  const sections: string[] = [`<div class="timeline">`];
  for (const [group, entries] of groups) {
    sections.push(`<section><h4>${escapeHtml(group)}</h4><ol>`);
    for (const entry of entries) {
      const cls = entry.killed ? ` class="killed"` : "";
      const text = entry.killed ? `<s>${escapeHtml(entry.text)}</s>` : escapeHtml(entry.text);
      sections.push(`<li data-seq="${entry.seq}"${cls}>${text}</li>`);
    }
    sections.push(`</ol></section>`);
  }
  sections.push(`</div>`);
  return sections.join("\n");
}
