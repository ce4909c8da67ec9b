/** In-process fixture engine: a tiny HTTP server speaking the same API as
 * the real engine, with deterministic payloads and a controllable SSE
 * stream (optional connection drop to exercise reconnect). Tests run the
 * console's client modules against it end to end. */
import { createServer, type IncomingMessage, type Server, type ServerResponse } from "node:http";
import type { AddressInfo } from "node:net";

import type {
  DecisionsPayload,
  EngineEvent,
  GapPayload,
  GraphPayload,
  PendingDecisionPayload,
} from "../src/types.js";

export interface FixtureOptions {
  projectId?: string;
  dropStreamAfter?: number; // kill the first SSE connection after N events
  eventCount?: number;
}

export function fixtureGraph(): GraphPayload {
  const uncertainty: Record<string, number> = {};
  const nodes = [] as GraphPayload["nodes"];
  const edges = [] as GraphPayload["edges"];
  const add = (id: string, kind: string, attributes: Record<string, unknown>, u: number) => {
    nodes.push({ id, kind, attributes, attribute_history: {} });
    uncertainty[id] = u;
  };
  add("paper:p1", "paper", { title: "paper one" }, 1);
  add("paper:p2", "paper", { title: "paper two" }, 1);
  add("method:m1", "method", { name: "method one" }, 0);
  add("method:m2", "method", { name: "method two" }, 1);
  add("module:ppo", "module", { name: "PPO optimizer", module_type: "training" }, 0);
  add("benchmark:b1", "benchmark", { name: "bench one" }, 1);
  add("gap:g1", "gap", { description: "the corroborated gap", gap_type: "methods" }, 0);
  const connect = (id: string, src: string, relation: string, dst: string,
                   metrics: GraphPayload["edges"][number]["metrics"], u: number) => {
    edges.push({ id, src, relation, dst, metrics });
    uncertainty[id] = u;
  };
  connect("e1", "paper:p1", "proposes", "method:m1", null, 1);
  connect("e2", "paper:p2", "proposes", "method:m2", null, 1);
  connect("e3", "method:m1", "uses", "module:ppo", null, 0);
  connect("e4", "method:m1", "evaluated_on", "benchmark:b1",
          { reported: [["accuracy", 0.91], ["f1", 0.88]], measured: null,
            reproduction_failed: false }, 1);
  return { schema_version: 1, nodes, edges, uncertainty, provenance: {} };
}

function fixtureEvents(projectId: string, count: number): EngineEvent[] {
  const events: EngineEvent[] = [];
  const push = (type: string, payload: Record<string, unknown>) => {
    events.push({ seq: events.length + 1, ts: `t${events.length + 1}`,
                  project: projectId, type, payload });
  };
  push("project.created", { interest: "fixture interest" });
  push("phase.started", { phase: "P0" });
  push("decision.pending", { kind: "select_direction" });
  for (let cycle = 1; events.length < count - 2 && cycle <= 99; cycle++) {
    push("consensus.round.started", { round: 1, cycle });
    push("consensus.finding", { round: 1, cycle, agent: `prober-${cycle % 3}`,
                                gap: { description: `finding ${cycle}` } });
    push("consensus.decision", {
      cycle,
      decision: cycle % 4 === 0
        ? { action: "kill", subject: [`finding ${cycle}`], rationale: "already known" }
        : { action: "continue", subject: [`finding ${cycle}`], rationale: "keep" },
    });
  }
  while (events.length < count) {
    push("rwm.committed", { node_total: events.length, edge_total: events.length });
  }
  return events.slice(0, count);
}

export class FixtureEngine {
  readonly projectId: string;
  readonly events: EngineEvent[];
  readonly requests: { method: string; path: string }[] = [];
  phase = "P0";
  pending: PendingDecisionPayload[];
  resolved: DecisionsPayload["resolved"] = [];
  private server: Server | null = null;
  private streamConnections = 0;
  private dropStreamAfter: number;

  constructor(options: FixtureOptions = {}) {
    this.projectId = options.projectId ?? "fixture-prj";
    this.events = fixtureEvents(this.projectId, options.eventCount ?? 24);
    this.dropStreamAfter = options.dropStreamAfter ?? 0;
    this.pending = [{
      kind: "select_direction",
      options: [
        { id: "1", label: "direction one" },
        { id: "2", label: "direction two" },
      ],
      evidence: {},
      created_at: "t0",
    }];
  }

  get url(): string {
    const address = this.server?.address() as AddressInfo | null;
    if (!address) throw new Error("fixture engine not started");
    return `http://127.0.0.1:${address.port}`;
  }

  async start(): Promise<string> {
    this.server = createServer((req, res) => this.route(req, res));
    await new Promise<void>((resolve) => this.server!.listen(0, "127.0.0.1", resolve));
    return this.url;
  }

  async stop(): Promise<void> {
    if (!this.server) return;
    await new Promise<void>((resolve) => this.server!.close(() => resolve()));
    this.server = null;
  }

  private route(req: IncomingMessage, res: ServerResponse): void {
    const url = new URL(req.url ?? "/", this.url);
    const path = url.pathname;
    this.requests.push({ method: req.method ?? "GET", path });
    const p = this.projectId;
    if (req.method === "GET" && path === "/projects") {
      return json(res, 200, [{ id: p, phase: this.phase,
                               pending_decisions: this.pending.map((d) => d.kind),
                               interest: "fixture interest" }]);
    }
    if (req.method === "GET" && path === `/projects/${p}/graph`) {
      return json(res, 200, fixtureGraph());
    }
    if (req.method === "GET" && path === `/projects/${p}/gaps`) {
      const gaps: GapPayload[] = [{
        id: "gap:g1",
        attributes: { description: "the corroborated gap", gap_type: "methods" },
        uncertainty: 0,
        multiplicity: 2,
      }];
      return json(res, 200, gaps);
    }
    if (req.method === "GET" && path === `/projects/${p}/decisions`) {
      return json(res, 200, { pending: this.pending, resolved: this.resolved });
    }
    if (req.method === "GET" && path === `/projects/${p}/status`) {
      return json(res, 200, {
        id: p, phase: this.phase, phase_work_done: true, pending: this.pending,
        budget: { max_calls: 100, max_tokens: 1000, spent_calls: 3, spent_tokens: 42 },
        records: [],
      });
    }
    if (req.method === "POST" && path === `/projects/${p}/decisions`) {
      return void collectBody(req, (body) => {
        const { kind, option } = JSON.parse(body) as { kind: string; option: string };
        const index = this.pending.findIndex((d) => d.kind === kind);
        if (index === -1) {
          return json(res, 409, { detail: `no pending ${kind} decision` });
        }
        if (!this.pending[index].options.some((o) => String(o.id) === String(option))) {
          return json(res, 409, { detail: `option ${option} was not offered` });
        }
        this.pending.splice(index, 1);
        this.resolved.push({ kind, option, actor: "console", ts: "t" });
        return json(res, 200, { ok: true, phase: this.phase,
                                pending: this.pending.map((d) => d.kind) });
      });
    }
    if (req.method === "POST" && path === `/projects/${p}/advance`) {
      if (this.pending.length > 0) {
        return json(res, 409, { detail: "blocked on pending decisions" });
      }
      this.phase = this.phase === "P0" ? "P1" : this.phase;
      return json(res, 200, { ok: true, phase: this.phase, pending: [] });
    }
    if (req.method === "GET" && path === `/projects/${p}/transcript`) {
      return this.streamTranscript(req, url, res);
    }
    json(res, 404, { detail: `no route ${req.method} ${path}` });
  }

  private streamTranscript(req: IncomingMessage, url: URL, res: ServerResponse): void {
    this.streamConnections += 1;
    const lastEventId = Number(req.headers["last-event-id"] ?? 0);
    const after = Math.max(Number(url.searchParams.get("after") ?? 0), lastEventId);
    res.writeHead(200, { "Content-Type": "text/event-stream",
                         "Cache-Control": "no-cache" });
    const toSend = this.events.filter((e) => e.seq > after);
    const shouldDrop = this.dropStreamAfter > 0 && this.streamConnections === 1;
    let sent = 0;
    for (const event of toSend) {
      res.write(`id: ${event.seq}\nevent: ${event.type}\ndata: ${JSON.stringify(event)}\n\n`);
      sent += 1;
      if (shouldDrop && sent >= this.dropStreamAfter) {
        res.destroy(); // simulate a dropped connection mid-stream
        return;
      }
    }
    res.end();
  }
}

function json(res: ServerResponse, status: number, payload: unknown): void {
  res.writeHead(status, { "Content-Type": "application/json" });
  res.end(JSON.stringify(payload));
}

function collectBody(req: IncomingMessage, done: (body: string) => void): void {
  let body = "";
  req.on("data", (chunk) => (body += chunk));
  req.on("end", () => done(body));
}
