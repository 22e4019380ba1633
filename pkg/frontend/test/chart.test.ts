import { describe, expect, it } from "vitest";

import { posteriorChart, timelineChart } from "../src/chart.js";
import { buildView } from "../src/view.js";
import type { PosteriorSummary, SessionDetail } from "../src/types.js";

function summary(alpha: number, beta: number): PosteriorSummary {
  return {
    belief: { kind: "beta_bernoulli", alpha, beta },
    predictive_mean: alpha / (alpha + beta),
  };
}

const DETAIL: SessionDetail = {
  id: "abc",
  status: "stopped",
  stage: 3,
  advice: "stop",
  reservation_level: 0.12,
  accumulated_cost: 0.3,
  history: [0, 0, 0, 0],
  levels: [0.28, 0.26, 0.2, 0.12],
  posteriors: [summary(1, 1), summary(1, 2), summary(1, 3), summary(1, 4)],
  model: {
    offers: { kind: "bernoulli" },
    prior: { kind: "beta_bernoulli", alpha: 1, beta: 1 },
    cost: 0.1,
    utility: { family: "exponential", gamma: -1 },
    horizon: 10,
  },
  created: "",
  updated: "",
  realized_wealth: -0.3,
  realized_utility: -1.35,
};

describe("timelineChart", () => {
  const view = buildView(DETAIL);
  const svg = timelineChart(view, DETAIL.levels, [
    { gamma: -0.5, levels: [0.4, 0.38, 0.33, 0.25] },
  ]);

  it("draws one dot per offer, keyed by stage", () => {
    const dots = svg.querySelectorAll("circle.offer-dot");
    expect(dots).toHaveLength(4);
    const stages = [...dots].map((d) => d.getAttribute("data-stage"));
    expect(stages).toEqual(["0", "1", "2", "3"]);
  });

  it("marks the stopping offer and labels it STOP", () => {
    const stops = svg.querySelectorAll("circle.offer-dot.stop");
    expect(stops).toHaveLength(1);
    expect(stops[0].getAttribute("data-stage")).toBe("3");
    expect(stops[0].getAttribute("data-advice")).toBe("stop");
    const labels = [...svg.querySelectorAll("text.stop-label")];
    expect(labels.map((t) => t.textContent)).toEqual(["STOP"]);
  });

  it("draws the reservation curve and one overlay per retired gamma", () => {
    expect(svg.querySelectorAll("polyline.level-line")).toHaveLength(1);
    const overlays = svg.querySelectorAll("polyline.level-overlay");
    expect(overlays).toHaveLength(1);
    const label = svg.querySelector("text.overlay-label");
    expect(label?.textContent).toBe("γ=-0.5");
  });

  it("skips null levels instead of plotting them", () => {
    const sparse = timelineChart(view, [0.28, null, 0.2, 0.12]);
    const line = sparse.querySelector("polyline.level-line");
    expect(line?.getAttribute("points")?.split(" ")).toHaveLength(3);
  });
});

describe("posteriorChart", () => {
  const view = buildView(DETAIL);
  const svg = posteriorChart(view);

  it("plots one dot per belief state with a tooltip", () => {
    const dots = [...svg.querySelectorAll("circle.posterior-dot")];
    expect(dots).toHaveLength(4);
    expect(dots[3].querySelector("title")?.textContent).toContain("Beta(1, 4)");
    expect(svg.querySelectorAll("polyline.posterior-line")).toHaveLength(1);
  });
});
