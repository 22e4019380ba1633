import { afterEach, describe, expect, it, vi } from "vitest";

import {
  ApiError,
  createSession,
  deleteSession,
  getSession,
  listSessions,
  postOffer,
  whatIf,
} from "../src/client.js";
import type { HouseModelJson } from "../src/types.js";

const MODEL: HouseModelJson = {
  offers: { kind: "bernoulli" },
  prior: { kind: "beta_bernoulli", alpha: 1, beta: 1 },
  cost: 0.1,
  utility: { family: "exponential", gamma: -1 },
  horizon: 10,
};

interface Captured {
  url: string;
  method: string;
  body: unknown;
}

function stubFetch(status: number, payload: unknown): Captured {
  const captured: Captured = { url: "", method: "", body: null };
  vi.stubGlobal(
    "fetch",
    vi.fn(async (url: string, init?: RequestInit) => {
      captured.url = url;
      captured.method = init?.method ?? "GET";
      captured.body =
        typeof init?.body === "string" ? JSON.parse(init.body) : null;
      if (status === 204) {
        return new Response(null, { status });
      }
      return new Response(JSON.stringify(payload), {
        status,
        headers: { "Content-Type": "application/json" },
      });
    }),
  );
  return captured;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("route wiring", () => {
  it("creates sessions with the model as the body", async () => {
    const captured = stubFetch(201, { id: "s1", status: "active", stage: 0 });
    const resp = await createSession("http://host:9", MODEL);
    expect(captured.url).toBe("http://host:9/sessions");
    expect(captured.method).toBe("POST");
    expect(captured.body).toEqual(MODEL);
    expect(resp.id).toBe("s1");
  });

  it("strips a trailing slash from the base URL", async () => {
    const captured = stubFetch(200, { sessions: [] });
    await listSessions("http://host:9/");
    expect(captured.url).toBe("http://host:9/sessions");
    expect(captured.method).toBe("GET");
  });

  it("fetches one session by id", async () => {
    const captured = stubFetch(200, { id: "s1" });
    await getSession("http://host:9", "s1");
    expect(captured.url).toBe("http://host:9/sessions/s1");
  });

  it("posts offers as {offer}", async () => {
    const captured = stubFetch(200, { advice: "continue" });
    await postOffer("http://host:9", "s1", 0.4);
    expect(captured.url).toBe("http://host:9/sessions/s1/offers");
    expect(captured.body).toEqual({ offer: 0.4 });
  });

  it("posts what-if probes without mutating anything else", async () => {
    const captured = stubFetch(200, { advice: "stop" });
    const resp = await whatIf("http://host:9", "s1", 0.9);
    expect(captured.url).toBe("http://host:9/sessions/s1/whatif");
    expect(captured.body).toEqual({ offer: 0.9 });
    expect(resp.advice).toBe("stop");
  });

  it("treats delete's 204 as success with no payload", async () => {
    const captured = stubFetch(204, null);
    await expect(deleteSession("http://host:9", "s1")).resolves.toBeUndefined();
    expect(captured.method).toBe("DELETE");
  });
});

describe("error envelope", () => {
  it("rethrows the service's code and message verbatim", async () => {
    stubFetch(409, { code: "session_stopped", message: "session already stopped" });
    const err = await postOffer("http://h", "s1", 0).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe("session_stopped");
    expect(err.message).toBe("session already stopped");
  });

  it("falls back to a generic error when the body is not JSON", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => new Response("boom", { status: 500 })),
    );
    const err = await getSession("http://h", "s1").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("error");
    expect(err.message).toContain("500");
  });
});
