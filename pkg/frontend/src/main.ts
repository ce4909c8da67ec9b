/** Browser glue: one project view with a 2-second status poll, the graph
 * pane with kind/uncertainty filters, decision forms, and the SSE
 * timeline. No mutation leaves this page except decision submissions and
 * explicit advance clicks. */
import { ApiClient } from "./api.js";
import { buildGraphView, renderGraphSvg, renderNodeDetail, type GraphFilter } from "./graph_view.js";
import { renderDecisionList, submitDecision } from "./decision_form.js";
import { TimelineModel, renderTimeline } from "./timeline.js";
import { TranscriptStream } from "./sse.js";

const POLL_INTERVAL_MS = 2000;

function el(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found;
}

export async function mountConsole(baseUrl: string): Promise<void> {
  const api = new ApiClient(baseUrl);
  const projects = await api.listProjects();
  if (projects.length === 0) {
    el("app").innerHTML = `<p>no projects in the store</p>`;
    return;
  }
  const projectId = new URLSearchParams(location.search).get("project") ?? projects[0].id;
  const filter: GraphFilter = {};
  const timeline = new TimelineModel();

  const refreshGraph = async () => {
    const payload = await api.getGraph(projectId);
    const view = buildGraphView(payload, filter);
    el("graph").innerHTML = renderGraphSvg(view);
    el("graph-counts").textContent =
      `${view.nodeCount} nodes / ${view.edgeCount} edges / ` +
      `${view.verifiedCount} verified / ${view.unverifiedCount} unverified`;
    for (const nodeEl of document.querySelectorAll("#graph .node")) {
      nodeEl.addEventListener("click", () => {
        const nodeId = (nodeEl as HTMLElement).dataset["nodeId"] ?? "";
        el("detail").innerHTML = renderNodeDetail(view, nodeId);
      });
    }
  };

  const refreshDecisions = async () => {
    const decisions = await api.getDecisions(projectId);
    el("decisions").innerHTML = renderDecisionList(decisions.pending);
    for (const form of document.querySelectorAll<HTMLFormElement>("#decisions form.decision")) {
      form.addEventListener("submit", async (submitEvent) => {
        submitEvent.preventDefault();
        const kind = form.dataset["kind"] ?? "";
        const pending = decisions.pending.find((d) => d.kind === kind);
        const choice = form.querySelector<HTMLInputElement>("input:checked");
        const statusEl = form.querySelector(".decision-status");
        if (!pending || !choice || !statusEl) return;
        const result = await submitDecision(api, projectId, pending, choice.value);
        statusEl.textContent = result.message;
        if (result.ok) void refreshAll();
      });
    }
  };

  const refreshStatus = async () => {
    const status = await api.getStatus(projectId);
    el("status").textContent =
      `${status.id}: phase ${status.phase}` +
      (status.pending.length ? ` (waiting on ${status.pending.map((d) => d.kind).join(", ")})` : "");
  };

  const refreshAll = async () => {
    await Promise.all([refreshStatus(), refreshGraph(), refreshDecisions()]);
  };

  el("advance").addEventListener("click", async () => {
    try {
      await api.advance(projectId);
    } catch {
      // blocked on decisions: the status line already explains
    }
    void refreshAll();
  });

  for (const input of document.querySelectorAll<HTMLInputElement>("input[name=u-filter]")) {
    input.addEventListener("change", () => {
      filter.uncertainty = input.value === "all" ? undefined : Number(input.value);
      void refreshGraph();
    });
  }

  const stream = new TranscriptStream(api.transcriptUrl(projectId, 0, true), {
    onEvent: (event) => {
      timeline.add(event);
      el("timeline").innerHTML = renderTimeline(timeline);
    },
    onGap: (expected, got) => {
      el("stream-status").textContent = `sequence gap: expected ${expected}, got ${got}`;
    },
    onStatusChange: (status) => {
      el("stream-status").textContent = `stream: ${status}`;
    },
  });
  void stream.run();

  await refreshAll();
  setInterval(() => void refreshStatus(), POLL_INTERVAL_MS);
  setInterval(() => void refreshDecisions(), POLL_INTERVAL_MS);
}
