/** Thin client over the engine API.
 *
 * Deliberately read-only except for the two sanctioned mutations:
 * POST /decisions and POST /advance. Everything else is a GET.
 */
import type {
  DecisionsPayload,
  GapPayload,
  GraphPayload,
  ProjectSummary,
  StatusPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  listProjects(): Promise<ProjectSummary[]> {
    return this.getJson("/projects");
  }

  getGraph(projectId: string): Promise<GraphPayload> {
    return this.getJson(`/projects/${projectId}/graph`);
  }

  getGaps(projectId: string): Promise<GapPayload[]> {
    return this.getJson(`/projects/${projectId}/gaps`);
  }

  getDecisions(projectId: string): Promise<DecisionsPayload> {
    return this.getJson(`/projects/${projectId}/decisions`);
  }

  getStatus(projectId: string): Promise<StatusPayload> {
    return this.getJson(`/projects/${projectId}/status`);
  }

  submitDecision(projectId: string, kind: string, option: string, actor = "console") {
    return this.postJson<{ ok: boolean; phase: string; pending: string[] }>(
      `/projects/${projectId}/decisions`,
      { kind, option, actor },
    );
  }

  advance(projectId: string) {
    return this.postJson<{ ok: boolean; phase: string; pending: string[] }>(
      `/projects/${projectId}/advance`,
      {},
    );
  }

  transcriptUrl(projectId: string, after = 0, follow = true): string {
    return `${this.baseUrl}/projects/${projectId}/transcript?after=${after}&follow=${follow}`;
  }
}
