import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, newIdempotencyKey } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("fetches the queue from the documented path with the token header", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ institution: "zeri", candidates: [] }));
    const api = new ApiClient("http://server", "tok-1", fetchFn);
    await api.queue("zeri");
    expect(fetchFn).toHaveBeenCalledWith("http://server/v1/queue?institution=zeri", {
      headers: { "X-Auth-Token": "tok-1" },
    });
  });

  it("posts decisions with verdict, kind, title and idempotency key", async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse({ sequence: 1, candidate_id: "mc-1", status: "accepted" }),
    );
    const api = new ApiClient("http://server", "", fetchFn);
    await api.submitDecision(
      "mc-1",
      "r.one",
      "zeri",
      { verdict: "accept_associative", kind: "copy_of", preferredTitle: { mark: "T" } },
      "key-abc",
    );
    const [url, init] = fetchFn.mock.calls[0];
    expect(url).toBe("http://server/v1/decisions");
    expect(init?.method).toBe("POST");
    expect((init?.headers as Record<string, string>)["Idempotency-Key"]).toBe("key-abc");
    expect(JSON.parse(String(init?.body))).toEqual({
      candidate_id: "mc-1",
      reviewer: "r.one",
      institution: "zeri",
      verdict: "accept_associative",
      associative_kind: "copy_of",
      preferred_title: { mark: "T" },
    });
  });

  it("omits the preferred_title field when the reviewer skipped it", async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse({ sequence: 2, candidate_id: "mc-1", status: "accepted" }),
    );
    const api = new ApiClient("http://server", "", fetchFn);
    await api.submitDecision("mc-1", "r", "zeri", { verdict: "accept_equivalent" }, "k");
    const body = JSON.parse(String(fetchFn.mock.calls[0][1]?.body));
    expect("preferred_title" in body).toBe(false);
  });

  it("raises ApiError on non-2xx responses", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ detail: "nope" }, 404));
    const api = new ApiClient("http://server", "", fetchFn);
    await expect(api.match("mc-missing")).rejects.toBeInstanceOf(ApiError);
  });

  it("only ever calls /v1/ paths", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ roots: [] }));
    const api = new ApiClient("http://server", "", fetchFn);
    await api.facets();
    await api.stats().catch(() => undefined);
    for (const [url] of fetchFn.mock.calls) {
      expect(String(url)).toContain("/v1/");
    }
  });
});

describe("newIdempotencyKey", () => {
  it("produces unique keys", () => {
    const keys = new Set(Array.from({ length: 50 }, () => newIdempotencyKey()));
    expect(keys.size).toBe(50);
  });
});
