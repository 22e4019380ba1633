/**
 * Pure projection from a session document to the view model. Used both
 * for live updates (the app keeps a session document up to date from
 * mutation responses) and for reload (the document comes straight from
 * GET /sessions/{id}), so a reload reconstructs the identical view.
 */

import type {
  Advice,
  BeliefJson,
  HouseModelJson,
  PosteriorPoint,
  SessionDetail,
  TimelineRow,
  UiSessionView,
  UtilityJson,
} from "./types.js";

export function fmt(x: number | null | undefined, digits = 4): string {
  if (x === null || x === undefined) return "n/a";
  return x.toFixed(digits).replace(/\.?0+$/, "") || "0";
}

export function describeBelief(belief: BeliefJson): string {
  switch (belief.kind) {
    case "beta_bernoulli":
      return `Beta(${fmt(belief.alpha as number, 2)}, ${fmt(belief.beta as number, 2)})`;
    case "inv_gamma_exp":
      return `InvGamma(a=${fmt(belief.a as number, 2)}, b=${fmt(belief.b as number, 2)}) after s=${fmt(belief.s as number, 2)}, n=${belief.n}`;
    case "grid": {
      const grid = belief.theta_grid as unknown[];
      return `grid over ${grid.length} parameter values`;
    }
    default:
      return belief.kind;
  }
}

export function describeUtility(u: UtilityJson): string {
  switch (u.family) {
    case "linear":
      return "linear utility";
    case "exponential":
      return `exponential utility, γ=${fmt(u.gamma, 3)}`;
    case "power":
      return `power utility, p=${fmt(u.exponent, 3)}, shift ${fmt(u.shift, 3)}`;
    case "log":
      return `log utility, shift ${fmt(u.shift, 3)}`;
  }
}

export function describeModel(model: HouseModelJson): string {
  const horizon =
    model.horizon === null ? "infinite horizon" : `horizon ${model.horizon}`;
  return [
    `${model.offers.kind} offers`,
    `${describeBelief(model.prior)} prior`,
    `cost ${fmt(model.cost, 4)}`,
    describeUtility(model.utility),
    horizon,
  ].join(", ");
}

function timelineRows(detail: SessionDetail): TimelineRow[] {
  const rows: TimelineRow[] = [];
  for (let i = 0; i < detail.history.length; i++) {
    const last = i === detail.history.length - 1;
    const advice: Advice =
      last && detail.advice !== null ? detail.advice : "continue";
    rows.push({
      stage: i,
      offer: detail.history[i],
      level: detail.levels[i] ?? null,
      advice,
    });
  }
  return rows;
}

function posteriorPoints(detail: SessionDetail): PosteriorPoint[] {
  return detail.posteriors.map((p, stage) => ({
    stage,
    label: describeBelief(p.belief),
    predictiveMean: p.predictive_mean,
  }));
}

function banner(detail: SessionDetail): string {
  if (detail.status === "stopped") {
    const accepted = detail.history[detail.history.length - 1];
    return (
      `stopped: accepted ${fmt(accepted)} at stage ${detail.stage}, ` +
      `wealth ${fmt(detail.realized_wealth ?? null)}`
    );
  }
  return (
    `active: stage ${detail.stage}, awaiting offer ` +
    `(quoted level ${fmt(detail.reservation_level)})`
  );
}

export function buildView(detail: SessionDetail): UiSessionView {
  return {
    sessionId: detail.id,
    modelSummary: describeModel(detail.model),
    gamma:
      detail.model.utility.family === "exponential"
        ? (detail.model.utility.gamma ?? null)
        : null,
    horizon: detail.model.horizon,
    status: detail.status,
    statusBanner: banner(detail),
    lastAdvice: detail.advice,
    stage: detail.stage,
    accumulatedCost: detail.accumulated_cost,
    nextLevel: detail.status === "stopped" ? null : detail.reservation_level,
    timeline: timelineRows(detail),
    posterior: posteriorPoints(detail),
    realizedWealth: detail.realized_wealth ?? null,
  };
}
