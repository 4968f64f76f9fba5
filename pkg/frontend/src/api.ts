/**
 * Typed client for the semdiff session service.
 *
 * The transport is injectable so tests can run against a scripted fake;
 * the default transport speaks JSON over fetch.  All state fields are
 * passed through verbatim from the server: the client performs no search
 * arithmetic of its own.
 */

export interface SessionSummary {
  session_id: string;
  status: "active" | "converged" | "confirmed" | "abandoned";
  algorithm: "simple" | "tolerant";
  step_index: number;
  interval: [number, number];
  position: number;
  variant: number;
  converged: boolean;
  epsilon: number;
  revision: number;
  space: { base: number; range: number; step: number; count: number };
  weights: { slightly: number; moderately: number; significantly: number };
}

export interface HistoryEntry {
  step_index: number;
  power: string;
  direction: string;
  position: number;
  variant: number;
  interval: [number, number];
}

export interface CreateSessionParams {
  base: number;
  range: number;
  step: number;
  algorithm: "simple" | "tolerant";
  weights: { slightly: number; moderately: number; significantly: number };
  epsilon?: number;
}

export type PowerWord = "slightly" | "moderately" | "significantly";
export type DirectionWord = "greater" | "less";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

export interface Transport {
  request(method: string, path: string, body?: unknown): Promise<unknown>;
}

export class HttpTransport implements Transport {
  constructor(private readonly baseUrl: string) {}

  async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await resp.json().catch(() => ({}))) as Record<string, unknown>;
    if (!resp.ok) {
      const err = (payload as { error?: { code?: string; message?: string } }).error;
      throw new ApiError(err?.code ?? "unknown", err?.message ?? resp.statusText, resp.status);
    }
    return payload;
  }
}

export class SemdiffClient {
  constructor(private readonly transport: Transport) {}

  createSession(params: CreateSessionParams): Promise<SessionSummary> {
    return this.transport.request("POST", "/sessions", params) as Promise<SessionSummary>;
  }

  getSession(id: string): Promise<SessionSummary> {
    return this.transport.request("GET", `/sessions/${id}`) as Promise<SessionSummary>;
  }

  applyModifier(id: string, power: PowerWord, direction: DirectionWord): Promise<SessionSummary> {
    return this.transport.request("POST", `/sessions/${id}/modifiers`, {
      power,
      direction,
    }) as Promise<SessionSummary>;
  }

  undo(id: string): Promise<SessionSummary> {
    return this.transport.request("POST", `/sessions/${id}/undo`) as Promise<SessionSummary>;
  }

  confirm(id: string): Promise<SessionSummary> {
    return this.transport.request("POST", `/sessions/${id}/confirm`) as Promise<SessionSummary>;
  }

  abandon(id: string): Promise<SessionSummary> {
    return this.transport.request("POST", `/sessions/${id}/abandon`) as Promise<SessionSummary>;
  }

  async history(id: string): Promise<HistoryEntry[]> {
    const payload = (await this.transport.request("GET", `/sessions/${id}/history`)) as {
      history: HistoryEntry[];
    };
    return payload.history;
  }

  /** Long-poll push channel: resolves once the revision exceeds afterRevision or the timeout lapses. */
  waitForUpdate(id: string, afterRevision: number, timeoutSeconds: number): Promise<SessionSummary> {
    const query = `after_revision=${afterRevision}&timeout=${timeoutSeconds}`;
    return this.transport.request("GET", `/sessions/${id}/updates?${query}`) as Promise<SessionSummary>;
  }
}
