/** Decision review: render pending decisions with their evidence links and
 * submit the chosen option. Only listed options are submittable; a
 * conflict (someone decided first) is surfaced verbatim from the API. */
import { ApiClient, ApiError } from "./api.js";
import type { PendingDecisionPayload } from "./types.js";

export interface DecisionSubmitResult {
  ok: boolean;
  message: string;
  phase?: string;
}

const KIND_TITLES: Record<string, string> = {
  select_direction: "Select a research direction",
  select_track: "Select the contribution track",
  approve_gap_slate: "Approve a gap to develop",
};

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderDecisionForm(decision: PendingDecisionPayload): string {
  const title = KIND_TITLES[decision.kind] ?? decision.kind;
  const options = decision.options
    .map((option) => {
      const extras = Object.entries(option)
        .filter(([key]) => key !== "id" && key !== "label")
        .map(([key, value]) => `${key}: ${JSON.stringify(value)}`)
        .join(", ");
      return (
        `<li><label><input type="radio" name="${decision.kind}" ` +
        `value="${escapeHtml(String(option.id))}"/> ` +
        `${escapeHtml(option.label)}` +
        (extras ? ` <small>${escapeHtml(extras)}</small>` : "") +
        `</label></li>`
      );
    })
    .join("");
  return (
    `<form class="decision" data-kind="${escapeHtml(decision.kind)}">` +
    `<h3>${escapeHtml(title)}</h3>` +
    `<ul>${options}</ul>` +
    `<button type="submit">Submit decision</button>` +
    `<p class="decision-status" role="status"></p>` +
    `</form>`
  );
}

export function renderDecisionList(pending: PendingDecisionPayload[]): string {
  if (pending.length === 0) {
    return `<div class="decisions empty">no pending decisions</div>`;
  }
  return `<div class="decisions">${pending.map(renderDecisionForm).join("\n")}</div>`;
}

/** Submit a choice; only options the API offered are accepted locally. */
export async function submitDecision(
  api: ApiClient,
  projectId: string,
  decision: PendingDecisionPayload,
  optionId: string,
): Promise<DecisionSubmitResult> {
  if (!decision.options.some((o) => String(o.id) === optionId)) {
    return { ok: false, message: `option ${optionId} was not offered` };
  }
  try {
    const result = await api.submitDecision(projectId, decision.kind, optionId);
    return { ok: true, message: `recorded ${decision.kind}=${optionId}`, phase: result.phase };
  } catch (error) {
    if (error instanceof ApiError) {
      return { ok: false, message: error.message };
    }
    throw error;
  }
}
