/**
 * Payload shapes of the advisor service, mirrored field for field, plus
 * the view model the page renders. The view is a pure projection of
 * GET /sessions/{id}; nothing numeric is computed client-side.
 */

export interface BeliefJson {
  kind: string;
  [key: string]: unknown;
}

export interface PosteriorSummary {
  belief: BeliefJson;
  predictive_mean: number;
}

export interface UtilityJson {
  family: "linear" | "exponential" | "power" | "log";
  gamma?: number;
  exponent?: number;
  shift?: number;
}

export interface OffersJson {
  kind: string;
  [key: string]: unknown;
}

export interface HouseModelJson {
  offers: OffersJson;
  prior: BeliefJson;
  cost: number;
  utility: UtilityJson;
  horizon: number | null;
}

export type Advice = "stop" | "continue";
export type SessionStatus = "active" | "stopped";

export interface CreateSessionResponse {
  id: string;
  status: SessionStatus;
  stage: number;
  reservation_level: number | null;
  horizon: number | null;
  prior: PosteriorSummary;
}

export interface OfferResponse {
  advice: Advice;
  status: SessionStatus;
  stage: number;
  reservation_level: number | null;
  accumulated_cost: number;
  posterior: PosteriorSummary;
  realized_wealth?: number;
  realized_utility?: number | null;
}

export interface WhatIfResponse {
  advice: Advice;
  hypothetical_stage: number;
  hypothetical_level: number | null;
  hypothetical_posterior: PosteriorSummary;
}

export interface SessionDetail {
  id: string;
  status: SessionStatus;
  stage: number;
  advice: Advice | null;
  reservation_level: number | null;
  accumulated_cost: number;
  history: number[];
  levels: (number | null)[];
  posteriors: PosteriorSummary[];
  model: HouseModelJson;
  created: string;
  updated: string;
  realized_wealth?: number;
  realized_utility?: number | null;
}

export interface SessionListItem {
  id: string;
  status: SessionStatus;
  stage: number;
  offers_seen: number;
  created: string;
  updated: string;
}

export interface SessionList {
  sessions: SessionListItem[];
}

/** One processed offer in the timeline, strictly ordered by stage. */
export interface TimelineRow {
  stage: number;
  offer: number;
  level: number | null;
  advice: Advice;
}

/** Belief trajectory point: the posterior entering the given stage. */
export interface PosteriorPoint {
  stage: number;
  label: string;
  predictiveMean: number;
}

export interface UiSessionView {
  sessionId: string;
  modelSummary: string;
  gamma: number | null;
  horizon: number | null;
  status: SessionStatus;
  statusBanner: string;
  /** Advice string of the last service response, verbatim. */
  lastAdvice: Advice | null;
  stage: number;
  accumulatedCost: number;
  /** Level quoted for the next offer; null once stopped or past the end. */
  nextLevel: number | null;
  timeline: TimelineRow[];
  posterior: PosteriorPoint[];
  realizedWealth: number | null;
}

/** A retired level curve kept on the chart for gamma comparisons. */
export interface LevelOverlay {
  gamma: number;
  levels: (number | null)[];
}
