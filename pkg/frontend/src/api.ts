// Thin typed client for the /v1 API. All portal mutations go through
// here; the UI never mutates state any other way.

import type {
  CoverageResponse,
  ErrorEnvelope,
  ImageInfo,
  LeaseInfo,
  MetricEvent,
  NodesResponse,
  SessionInfo,
  XappInfo,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiFailure extends Error {
  constructor(
    public status: number,
    public envelope: ErrorEnvelope["error"],
  ) {
    super(`${envelope.code}: ${envelope.message}`);
  }
}

export interface LeaseRequestBody {
  node_ids: string[];
  spectrum: { center: number; bandwidth: number };
  interval: [number, number];
  images: string[];
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private token: string = "demo-token",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown, auth = false): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (auth) headers["Authorization"] = `Bearer ${this.token}`;
    const resp = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let envelope: ErrorEnvelope["error"] = {
        code: `http_${resp.status}`,
        message: resp.statusText,
      };
      try {
        const doc = (await resp.json()) as ErrorEnvelope;
        if (doc && doc.error) envelope = doc.error;
      } catch {
        // non-JSON error body: keep the status-derived envelope
      }
      throw new ApiFailure(resp.status, envelope);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string; virtual_now_ms: number }> {
    return this.request("GET", "/v1/health");
  }

  nodes(): Promise<NodesResponse> {
    return this.request("GET", "/v1/nodes");
  }

  coverage(): Promise<CoverageResponse> {
    return this.request("GET", "/v1/coverage");
  }

  leases(): Promise<{ leases: LeaseInfo[] }> {
    return this.request("GET", "/v1/leases");
  }

  requestLease(body: LeaseRequestBody): Promise<LeaseInfo> {
    return this.request("POST", "/v1/leases", body, true);
  }

  terminateLease(leaseId: string): Promise<LeaseInfo> {
    return this.request("DELETE", `/v1/leases/${leaseId}`, undefined, true);
  }

  images(): Promise<{ images: ImageInfo[] }> {
    return this.request("GET", "/v1/images");
  }

  sessions(): Promise<{ sessions: SessionInfo[] }> {
    return this.request("GET", "/v1/sessions");
  }

  launchSession(leaseId: string, assignments: Record<string, string>): Promise<SessionInfo> {
    return this.request("POST", "/v1/sessions", { lease_id: leaseId, assignments }, true);
  }

  stopSession(sessionId: string): Promise<SessionInfo> {
    return this.request("DELETE", `/v1/sessions/${sessionId}`, undefined, true);
  }

  xapps(sessionId?: string): Promise<{ xapps: XappInfo[] }> {
    const q = sessionId ? `?session=${encodeURIComponent(sessionId)}` : "";
    return this.request("GET", `/v1/ric/xapps${q}`);
  }

  registerXapp(sessionId: string, decl: Record<string, unknown>): Promise<unknown> {
    return this.request("POST", "/v1/ric/xapps", { session_id: sessionId, xapp: decl }, true);
  }

  metrics(sessionId: string, after = 0): Promise<{ total: number; events: MetricEvent[] }> {
    return this.request(
      "GET",
      `/v1/metrics?session=${encodeURIComponent(sessionId)}&after=${after}`,
    );
  }

  liveMetricsUrl(sessionId: string): string {
    return `${this.baseUrl}/v1/metrics/live?session=${encodeURIComponent(sessionId)}`;
  }

  chartExportUrl(sessionId: string): string {
    return `${this.baseUrl}/v1/export/chart?session=${encodeURIComponent(sessionId)}`;
  }
}
