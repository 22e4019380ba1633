/**
 * Typed fetch client for the advisor service: one function per route,
 * errors rethrown with the service's {code, message} envelope intact.
 */

import type {
  CreateSessionResponse,
  HouseModelJson,
  OfferResponse,
  SessionDetail,
  SessionList,
  WhatIfResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(
  base: string,
  path: string,
  init: RequestInit = {},
): Promise<T> {
  const res = await fetch(base.replace(/\/$/, "") + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (res.status === 204) return undefined as T;
  let body: unknown = null;
  try {
    body = await res.json();
  } catch {
    // non-JSON body; the status alone has to do
  }
  if (!res.ok) {
    const err = (body ?? {}) as { code?: string; message?: string };
    throw new ApiError(
      res.status,
      err.code ?? "error",
      err.message ?? `request failed with status ${res.status}`,
    );
  }
  return body as T;
}

export function createSession(
  base: string,
  model: HouseModelJson,
): Promise<CreateSessionResponse> {
  return request(base, "/sessions", {
    method: "POST",
    body: JSON.stringify(model),
  });
}

export function listSessions(base: string): Promise<SessionList> {
  return request(base, "/sessions");
}

export function getSession(base: string, id: string): Promise<SessionDetail> {
  return request(base, `/sessions/${id}`);
}

export function postOffer(
  base: string,
  id: string,
  offer: number,
): Promise<OfferResponse> {
  return request(base, `/sessions/${id}/offers`, {
    method: "POST",
    body: JSON.stringify({ offer }),
  });
}

export function whatIf(
  base: string,
  id: string,
  offer: number,
): Promise<WhatIfResponse> {
  return request(base, `/sessions/${id}/whatif`, {
    method: "POST",
    body: JSON.stringify({ offer }),
  });
}

export function deleteSession(base: string, id: string): Promise<void> {
  return request(base, `/sessions/${id}`, { method: "DELETE" });
}
