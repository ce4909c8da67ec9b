/** Payload shapes of the engine HTTP API. The console never recomputes
 * anything from these: counts, uncertainty states, and metric values are
 * rendered exactly as received. */

export interface MetricVectorPayload {
  reported: [string, number][];
  measured: [string, number][] | null;
  reproduction_failed: boolean;
}

export interface NodePayload {
  id: string;
  kind: string;
  attributes: Record<string, unknown>;
  attribute_history: Record<string, unknown[]>;
}

export interface EdgePayload {
  id: string;
  src: string;
  relation: string;
  dst: string;
  metrics: MetricVectorPayload | null;
}

export interface GraphPayload {
  schema_version: number;
  nodes: NodePayload[];
  edges: EdgePayload[];
  uncertainty: Record<string, number>;
  provenance: Record<string, unknown[]>;
}

export interface GapPayload {
  id: string;
  attributes: Record<string, unknown>;
  uncertainty: number;
  multiplicity?: number;
}

export interface DecisionOption {
  id: string;
  label: string;
  [extra: string]: unknown;
}

export interface PendingDecisionPayload {
  kind: string;
  options: DecisionOption[];
  evidence: Record<string, unknown>;
  created_at: string;
}

export interface DecisionsPayload {
  pending: PendingDecisionPayload[];
  resolved: { kind: string; option: string; actor: string; ts: string }[];
}

export interface ProjectSummary {
  id: string;
  phase: string;
  pending_decisions: string[];
  interest: string;
}

export interface StatusPayload {
  id: string;
  phase: string;
  phase_work_done: boolean;
  pending: PendingDecisionPayload[];
  budget: { max_calls: number; max_tokens: number; spent_calls: number; spent_tokens: number };
  records: string[];
}

export interface EngineEvent {
  seq: number;
  ts: string;
  project: string;
  type: string;
  payload: Record<string, unknown>;
}
