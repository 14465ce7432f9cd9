// Typed client for the heritagebot session API. The only coupling to the
// backend is the JSON contract of the /v1 routes consumed here.

export type Role = "user" | "assistant";

export interface SessionSettings {
  readonly k: number;
  readonly min_score: number;
  readonly budget: number;
  readonly mode: string;
}

export interface SessionTurn {
  readonly role: Role;
  readonly text: string;
  readonly ts: string;
}

export interface Session {
  readonly session_id: string;
  readonly created_at: string;
  readonly settings: SessionSettings;
  readonly turns: readonly SessionTurn[];
}

export interface Hit {
  readonly main_key: string;
  readonly score: number;
}

export interface MessageResponse {
  readonly reply: string;
  readonly hits: readonly Hit[];
  readonly suggestions?: readonly string[];
}

export interface SearchHit extends Hit {
  readonly record: Readonly<Record<string, string>>;
}

export interface CreateSessionOptions {
  readonly k?: number;
  readonly min_score?: number;
  readonly budget?: number;
  readonly mode?: string;
}

/** Server rejected the request; `code` is the typed error code from the body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The request never produced an HTTP response (offline, refused, aborted). */
export class NetworkError extends Error {
  constructor(message: string, override readonly cause?: unknown) {
    super(message);
    this.name = "NetworkError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(readonly baseUrl: string, fetchImpl?: FetchLike) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  async createSession(options: CreateSessionOptions = {}): Promise<Session> {
    return this.request<Session>("POST", "/v1/sessions", options);
  }

  async getSession(sessionId: string): Promise<Session> {
    return this.request<Session>("GET", `/v1/sessions/${encodeURIComponent(sessionId)}`);
  }

  async postMessage(sessionId: string, text: string, mode?: string): Promise<MessageResponse> {
    const body: { text: string; mode?: string } = { text };
    if (mode !== undefined) {
      body.mode = mode;
    }
    return this.request<MessageResponse>(
      "POST",
      `/v1/sessions/${encodeURIComponent(sessionId)}/messages`,
      body
    );
  }

  async search(query: string, k: number): Promise<readonly SearchHit[]> {
    const params = new URLSearchParams({ q: query, k: String(k) });
    const data = await this.request<{ hits: SearchHit[] }>(
      "GET",
      `/v1/heritage/search?${params}`
    );
    return data.hits;
  }

  async health(): Promise<Record<string, unknown>> {
    return this.request<Record<string, unknown>>("GET", "/v1/health");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (cause) {
      throw new NetworkError(`request to ${path} failed`, cause);
    }
    if (!response.ok) {
      throw new ApiError(response.status, ...(await errorParts(response)));
    }
    return (await response.json()) as T;
  }
}

async function errorParts(response: Response): Promise<[string, string]> {
  try {
    const data = (await response.json()) as { error?: { code?: string; message?: string } };
    if (data.error?.code) {
      return [data.error.code, data.error.message ?? `HTTP ${response.status}`];
    }
  } catch {
    // non-JSON error body; fall through to the generic message
  }
  return ["http_error", `HTTP ${response.status}`];
}
