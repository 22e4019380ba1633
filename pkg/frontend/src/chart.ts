/**
 * SVG chart builders. Everything here is presentation: scale numbers
 * into pixels and emit shapes. The level and posterior numbers always
 * come from the service untouched.
 */

import type { LevelOverlay, UiSessionView } from "./types.js";
import { fmt } from "./view.js";

const SVG_NS = "http://www.w3.org/2000/svg";

interface Scale {
  x(stage: number): number;
  y(value: number): number;
}

function el<K extends string>(
  tag: K,
  attrs: Record<string, string | number> = {},
  text?: string,
): SVGElement {
  const node = document.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

function makeScale(
  stages: number,
  lo: number,
  hi: number,
  width: number,
  height: number,
  pad: number,
): Scale {
  const span = hi - lo || 1;
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const denom = Math.max(stages, 1);
  return {
    x: (stage) => pad + (stage / denom) * innerW,
    y: (value) => pad + (1 - (value - lo) / span) * innerH,
  };
}

function polyline(
  points: { stage: number; value: number }[],
  scale: Scale,
  cls: string,
): SVGElement {
  const path = points
    .map((p) => `${scale.x(p.stage).toFixed(1)},${scale.y(p.value).toFixed(1)}`)
    .join(" ");
  return el("polyline", { points: path, class: cls, fill: "none" });
}

function finitePoints(
  levels: (number | null)[],
): { stage: number; value: number }[] {
  const out: { stage: number; value: number }[] = [];
  levels.forEach((lv, stage) => {
    if (lv !== null) out.push({ stage, value: lv });
  });
  return out;
}

/**
 * Offers against reservation levels per stage. The stop decision is
 * the first dot on or above the level curve; that dot gets the stop
 * marker. Retired level curves from earlier gamma choices draw as
 * faded overlays for comparison.
 */
export function timelineChart(
  view: UiSessionView,
  levels: (number | null)[],
  overlays: LevelOverlay[] = [],
  width = 640,
  height = 240,
): SVGElement {
  const values: number[] = [];
  for (const row of view.timeline) values.push(row.offer);
  for (const lv of levels) if (lv !== null) values.push(lv);
  for (const ov of overlays)
    for (const lv of ov.levels) if (lv !== null) values.push(lv);
  if (values.length === 0) values.push(0, 1);
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  const margin = 0.1 * (hi - lo || 1);
  lo -= margin;
  hi += margin;

  const lastStage = Math.max(
    view.timeline.length - 1,
    levels.length - 1,
    ...overlays.map((ov) => ov.levels.length - 1),
    1,
  );
  const pad = 34;
  const scale = makeScale(lastStage, lo, hi, width, height, pad);
  const svg = el("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "timeline-chart",
    role: "img",
  });

  // axes and extremes
  svg.appendChild(
    el("line", {
      x1: pad, y1: height - pad, x2: width - pad, y2: height - pad,
      class: "axis",
    }),
  );
  svg.appendChild(
    el("line", { x1: pad, y1: pad, x2: pad, y2: height - pad, class: "axis" }),
  );
  svg.appendChild(el("text", { x: 4, y: pad, class: "tick" }, fmt(hi, 2)));
  svg.appendChild(
    el("text", { x: 4, y: height - pad, class: "tick" }, fmt(lo, 2)),
  );
  for (let s = 0; s <= lastStage; s++) {
    svg.appendChild(
      el(
        "text",
        { x: scale.x(s), y: height - pad + 14, class: "tick tick-x" },
        String(s),
      ),
    );
  }

  for (const ov of overlays) {
    const pts = finitePoints(ov.levels);
    if (pts.length === 0) continue;
    const line = polyline(pts, scale, "level-overlay");
    svg.appendChild(line);
    const last = pts[pts.length - 1];
    svg.appendChild(
      el(
        "text",
        { x: scale.x(last.stage) + 4, y: scale.y(last.value), class: "overlay-label" },
        `γ=${fmt(ov.gamma, 3)}`,
      ),
    );
  }

  const levelPts = finitePoints(levels);
  if (levelPts.length > 0) {
    svg.appendChild(polyline(levelPts, scale, "level-line"));
    for (const p of levelPts) {
      svg.appendChild(
        el("circle", {
          cx: scale.x(p.stage), cy: scale.y(p.value), r: 2.5,
          class: "level-dot",
        }),
      );
    }
  }

  for (const row of view.timeline) {
    const stopped = row.advice === "stop";
    svg.appendChild(
      el("circle", {
        cx: scale.x(row.stage),
        cy: scale.y(row.offer),
        r: stopped ? 6 : 4,
        class: stopped ? "offer-dot stop" : "offer-dot",
        "data-stage": row.stage,
        "data-advice": row.advice,
      }),
    );
    if (stopped) {
      svg.appendChild(
        el(
          "text",
          {
            x: scale.x(row.stage) + 9,
            y: scale.y(row.offer) - 6,
            class: "stop-label",
          },
          "STOP",
        ),
      );
    }
  }

  return svg;
}

/** Predictive mean of the next offer, per stage of the belief path. */
export function posteriorChart(
  view: UiSessionView,
  width = 640,
  height = 120,
): SVGElement {
  const pts = view.posterior.map((p) => ({
    stage: p.stage,
    value: p.predictiveMean,
  }));
  const values = pts.map((p) => p.value);
  if (values.length === 0) values.push(0, 1);
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  const margin = 0.15 * (hi - lo || 0.25);
  lo -= margin;
  hi += margin;

  const pad = 34;
  const lastStage = Math.max(pts.length - 1, 1);
  const scale = makeScale(lastStage, lo, hi, width, height, pad);
  const svg = el("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "posterior-chart",
    role: "img",
  });
  svg.appendChild(
    el("line", {
      x1: pad, y1: height - pad, x2: width - pad, y2: height - pad,
      class: "axis",
    }),
  );
  svg.appendChild(el("text", { x: 4, y: pad, class: "tick" }, fmt(hi, 3)));
  svg.appendChild(
    el("text", { x: 4, y: height - pad, class: "tick" }, fmt(lo, 3)),
  );
  if (pts.length > 0) svg.appendChild(polyline(pts, scale, "posterior-line"));
  for (const p of view.posterior) {
    const dot = el("circle", {
      cx: scale.x(p.stage),
      cy: scale.y(p.predictiveMean),
      r: 3,
      class: "posterior-dot",
      "data-stage": p.stage,
    });
    dot.appendChild(el("title", {}, `${p.label}, mean ${fmt(p.predictiveMean)}`));
    svg.appendChild(dot);
  }
  return svg;
}
