/** Typed client for the documented /v1 endpoints; nothing else is ever called.
 * The institution token is sent as X-Auth-Token on every request; decision
 * posts carry an Idempotency-Key so a retry (or a double-click) can never
 * produce a second log entry. */

import type {
  CandidateCard,
  DecisionAck,
  FacetTree,
  QueueResponse,
  Stats,
  VerdictChoice,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export function newIdempotencyKey(): string {
  const cryptoApi = globalThis.crypto;
  if (cryptoApi && "randomUUID" in cryptoApi) {
    return cryptoApi.randomUUID();
  }
  return `k-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private token: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  setToken(token: string): void {
    this.token = token;
  }

  private headers(extra?: Record<string, string>): Record<string, string> {
    const headers: Record<string, string> = { ...extra };
    if (this.token) {
      headers["X-Auth-Token"] = this.token;
    }
    return headers;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: this.headers(),
    });
    if (!response.ok) {
      throw new ApiError(response.status, `GET ${path} failed: ${response.status}`);
    }
    return (await response.json()) as T;
  }

  queue(institution: string): Promise<QueueResponse> {
    return this.getJson(`/v1/queue?institution=${encodeURIComponent(institution)}`);
  }

  match(candidateId: string): Promise<CandidateCard & { status: string }> {
    return this.getJson(`/v1/matches/${encodeURIComponent(candidateId)}`);
  }

  stats(): Promise<Stats> {
    return this.getJson("/v1/stats");
  }

  facets(): Promise<FacetTree> {
    return this.getJson("/v1/facets");
  }

  async submitDecision(
    candidateId: string,
    reviewer: string,
    institution: string,
    choice: VerdictChoice,
    idempotencyKey: string,
  ): Promise<DecisionAck> {
    const body: Record<string, unknown> = {
      candidate_id: candidateId,
      reviewer,
      institution,
      verdict: choice.verdict,
    };
    if (choice.verdict === "accept_associative") {
      body.associative_kind = choice.kind;
    }
    if ("preferredTitle" in choice && choice.preferredTitle) {
      body.preferred_title = choice.preferredTitle;
    }
    const response = await this.fetchFn(`${this.baseUrl}/v1/decisions`, {
      method: "POST",
      headers: this.headers({
        "Content-Type": "application/json",
        "Idempotency-Key": idempotencyKey,
      }),
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, `POST /v1/decisions failed: ${response.status}`);
    }
    return (await response.json()) as DecisionAck;
  }
}
