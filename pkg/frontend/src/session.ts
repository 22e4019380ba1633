/**
 * Local session document maintenance. Each mutation response from the
 * service patches the document exactly the way the server records it,
 * so the document always equals what GET /sessions/{id} would return
 * (timestamps aside) and the view stays a pure projection of it.
 */

import type {
  CreateSessionResponse,
  HouseModelJson,
  OfferResponse,
  SessionDetail,
} from "./types.js";

export function detailFromCreate(
  resp: CreateSessionResponse,
  model: HouseModelJson,
): SessionDetail {
  return {
    id: resp.id,
    status: resp.status,
    stage: resp.stage,
    advice: null,
    reservation_level: resp.reservation_level,
    accumulated_cost: 0,
    history: [],
    levels: [resp.reservation_level],
    posteriors: [resp.prior],
    model,
    created: "",
    updated: "",
  };
}

export function applyOffer(
  doc: SessionDetail,
  offer: number,
  resp: OfferResponse,
): SessionDetail {
  const next: SessionDetail = {
    ...doc,
    status: resp.status,
    stage: resp.stage,
    advice: resp.advice,
    reservation_level: resp.reservation_level,
    accumulated_cost: resp.accumulated_cost,
    history: [...doc.history, offer],
    levels: [...doc.levels],
    posteriors: [...doc.posteriors],
  };
  if (resp.status === "stopped") {
    next.realized_wealth = resp.realized_wealth;
    next.realized_utility = resp.realized_utility;
  } else {
    // The server appends the freshly quoted level and posterior only
    // while the session is running.
    next.levels.push(resp.reservation_level);
    next.posteriors.push(resp.posterior);
  }
  return next;
}
