/** Typed client for the /v1 session API. The server is authoritative for
 * every number shown in the UI; this layer only moves JSON. */

export interface MetricsRow {
  K: number;
  modularity: number;
  scaled_nc: number;
  scaled_median_size: number;
  scaled_max_size: number;
  scaled_spectrum_energy: number;
}

export interface HistoryEntry {
  k: number;
  metrics: MetricsRow;
  cluster_sizes: number[];
  wall_time_ms: number;
}

export interface CreateResponse {
  id: string;
  status: string;
  n: number;
  m: number;
  components: number;
  warnings: string[];
}

export interface StepResponse {
  id: string;
  k: number;
  metrics: MetricsRow;
  cluster_sizes: number[];
  wall_time_ms: number;
}

export interface SessionInfo {
  id: string;
  status: string;
  n: number;
  m: number;
  components: number;
  k_current: number;
  warnings: string[];
  history: HistoryEntry[];
}

export interface StopResponse {
  id: string;
  status: string;
  k: number;
  metrics: MetricsRow;
  history: HistoryEntry[];
}

export interface SessionCreateBody {
  edges?: number[][];
  edge_list_text?: string;
  generator?: { n: number; p: number; seed: number };
  config?: Record<string, unknown>;
}

/** Structured server error ({"error": {code, message}}) or transport failure. */
export class ApiRequestError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

async function parseError(response: Response): Promise<ApiRequestError> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the transport message
  }
  return new ApiRequestError(response.status, code, message);
}

async function requestJson<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    throw await parseError(response);
  }
  return (await response.json()) as T;
}

export class LapincClient {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  createSession(body: SessionCreateBody): Promise<CreateResponse> {
    return requestJson(this.url("/v1/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  step(id: string): Promise<StepResponse> {
    return requestJson(this.url(`/v1/sessions/${id}/step`), { method: "POST" });
  }

  info(id: string): Promise<SessionInfo> {
    return requestJson(this.url(`/v1/sessions/${id}`));
  }

  stop(id: string): Promise<StopResponse> {
    return requestJson(this.url(`/v1/sessions/${id}/stop`), { method: "POST" });
  }

  async exportCsv(id: string): Promise<string> {
    const response = await fetch(this.url(`/v1/sessions/${id}/export?format=csv`));
    if (!response.ok) {
      throw await parseError(response);
    }
    return response.text();
  }

  exportJson(id: string): Promise<unknown> {
    return requestJson(this.url(`/v1/sessions/${id}/export?format=json`));
  }
}
