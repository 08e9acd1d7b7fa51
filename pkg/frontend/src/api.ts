/** Thin typed client for the annotation service HTTP API. */

import type { CategoryName } from "./rules.js";

export interface AssistFinding {
  category: CategoryName;
  span: [number, number] | null;
  role: string;
  weight: number;
}

export interface AssistPayload {
  advisory: boolean;
  findings: AssistFinding[];
  score: number;
  level: number;
  di_suggestion: number;
  di_alternates: number[];
  di_evidence: { rule: string; span: [number, number] }[];
}

export interface TaskPayload {
  done: boolean;
  unit_id?: string;
  text?: string;
  position?: number;
  total?: number;
  assist?: AssistPayload;
}

export interface SubmissionBody {
  unit_id: string;
  annotator: string;
  di: number;
  di_alternates: number[];
  ag_findings: { category: CategoryName; span: [number, number] | null }[];
  notes: string;
}

export interface SubmitResponse {
  record: Record<string, unknown>;
  computed: { score: number; level: number; toxic: boolean };
  revision: boolean;
}

export interface AgreementResponse {
  insufficient_data?: boolean;
  reason?: string;
  pair?: [string, string];
  kind?: string;
  n?: number;
  agreement_pct?: number;
  cohen_kappa?: number | null;
  gwet_ac1?: number | null;
  matrix?: { categories: number[]; counts: number[][] };
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly detail: unknown = null,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl = "",
    private readonly token: string | null = null,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private headers(json = false): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h["Content-Type"] = "application/json";
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    return h;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await resp.json().catch(() => null);
    if (!resp.ok) {
      const detail = body && (body as { detail?: unknown }).detail;
      throw new ApiError(`${resp.status} on ${path}`, resp.status, detail ?? body);
    }
    return body as T;
  }

  nextTask(annotator: string): Promise<TaskPayload> {
    const q = encodeURIComponent(annotator);
    return this.request<TaskPayload>(`/api/tasks/next?annotator=${q}`, {
      headers: this.headers(),
    });
  }

  assist(unitId: string): Promise<AssistPayload & { unit_id: string }> {
    const q = encodeURIComponent(unitId);
    return this.request(`/api/assist?unit_id=${q}`, { headers: this.headers() });
  }

  submit(body: SubmissionBody): Promise<SubmitResponse> {
    return this.request<SubmitResponse>(`/api/annotations`, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify(body),
    });
  }

  agreement(pair: [string, string], kind: string): Promise<AgreementResponse> {
    const q = encodeURIComponent(`${pair[0]},${pair[1]}`);
    return this.request<AgreementResponse>(
      `/api/agreement?pair=${q}&kind=${encodeURIComponent(kind)}`,
      { headers: this.headers() },
    );
  }

  annotators(): Promise<{ registered: string[]; in_store: string[] }> {
    return this.request(`/api/annotators`, { headers: this.headers() });
  }
}
