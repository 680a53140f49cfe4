// Typed client for the regrow session service.

export type Label = "positive" | "negative";

export interface ExampleRow {
  id: number;
  string: string;
  label: Label;
}

export interface SessionView {
  id: string;
  examples: ExampleRow[];
  inference_state: "idle" | "running" | "done" | "failed";
  stale: boolean;
  has_result: boolean;
  error: string | null;
}

export interface AcceptEntry {
  example_id: number;
  accepts: boolean;
}

export interface CandidateRow {
  rank: number;
  regex: string;
  posterior: number;
  accepts: AcceptEntry[];
}

export interface CandidatesPayload {
  status: string;
  stale: boolean;
  k: number;
  total_candidates: number;
  uninformative: boolean;
  candidates: CandidateRow[];
}

export interface InferOptions {
  seed?: number;
  max_seconds?: number;
  ensemble?: unknown;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public reason: string,
  ) {
    super(`service error ${status}: ${reason}`);
  }
}

type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

export class RegrowClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchFn = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let reason = response.statusText;
      try {
        const payload = await response.json();
        if (payload && typeof payload.reason === "string") reason = payload.reason;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, reason);
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  createSession(): Promise<SessionView> {
    return this.request("POST", "/sessions");
  }

  getSession(id: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${id}`);
  }

  deleteSession(id: string): Promise<void> {
    return this.request("DELETE", `/sessions/${id}`);
  }

  addExample(id: string, string: string, label: Label): Promise<SessionView> {
    return this.request("POST", `/sessions/${id}/examples`, { string, label });
  }

  removeExample(id: string, exampleId: number): Promise<SessionView> {
    return this.request("DELETE", `/sessions/${id}/examples/${exampleId}`);
  }

  infer(id: string, options: InferOptions = {}): Promise<{ state: string }> {
    return this.request("POST", `/sessions/${id}/infer`, options);
  }

  candidates(id: string, k: number): Promise<CandidatesPayload> {
    return this.request("GET", `/sessions/${id}/candidates?k=${k}`);
  }
}
