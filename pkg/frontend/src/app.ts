/**
 * Application shell. Wires the setup form, the offer and what-if
 * controls, the risk-aversion slider and the charts to the advisor
 * service. Every user action issues exactly one API call; everything
 * on screen is rendered from the session document via buildView.
 */

import {
  ApiError,
  createSession,
  deleteSession,
  getSession,
  postOffer,
  whatIf,
} from "./client.js";
import { posteriorChart, timelineChart } from "./chart.js";
import { applyOffer, detailFromCreate } from "./session.js";
import { buildView, fmt } from "./view.js";
import type {
  HouseModelJson,
  LevelOverlay,
  SessionDetail,
  UiSessionView,
  WhatIfResponse,
} from "./types.js";

const BASE_KEY = "advisor-ui:base";
const SESSION_KEY = "advisor-ui:session";
const DEFAULT_BASE = "http://127.0.0.1:8000";
const MAX_OVERLAYS = 4;

const SKELETON = `
<header>
  <h1>Advisor</h1>
  <label>service
    <input id="base-url" type="text" spellcheck="false">
  </label>
</header>
<div id="toast" hidden></div>
<section id="setup">
  <h2>New session</h2>
  <form id="setup-form">
    <label>alpha <input id="f-alpha" type="number" step="any" value="1"></label>
    <label>beta <input id="f-beta" type="number" step="any" value="1"></label>
    <label>cost <input id="f-cost" type="number" step="any" value="0.1"></label>
    <label>horizon <input id="f-horizon" type="number" step="1" value="10"></label>
    <label>gamma <input id="f-gamma" type="number" step="any" value="-1"></label>
    <label>custom model JSON (overrides the fields above)
      <textarea id="f-custom" rows="4" spellcheck="false"></textarea>
    </label>
    <button id="create-btn" type="submit">Create session</button>
  </form>
</section>
<section id="session" hidden>
  <div id="banner"></div>
  <div id="model-summary"></div>
  <div id="gamma-panel" hidden>
    <label>risk aversion &gamma; <span id="gamma-value"></span>
      <input id="gamma-slider" type="range" min="-3" max="-0.05" step="0.05">
    </label>
    <span class="hint">moving the slider starts a fresh session and keeps
      the old reservation curve as an overlay</span>
  </div>
  <div id="timeline-chart"></div>
  <table id="timeline">
    <thead><tr><th>stage</th><th>offer</th><th>level</th><th>advice</th></tr></thead>
    <tbody></tbody>
  </table>
  <div id="posterior-chart"></div>
  <form id="offer-form">
    <label>offer <input id="f-offer" type="number" step="any"></label>
    <button id="offer-btn" type="submit">Submit offer</button>
  </form>
  <form id="whatif-form">
    <label>what if the next offer were
      <input id="f-whatif" type="number" step="any"></label>
    <button id="whatif-btn" type="submit">Ask</button>
  </form>
  <div id="whatif-result"></div>
  <button id="discard-btn" type="button">Discard session</button>
</section>
`;

export class App {
  baseUrl: string;
  doc: SessionDetail | null = null;
  overlays: LevelOverlay[] = [];
  pending = false;

  constructor(readonly root: HTMLElement) {
    this.baseUrl = localStorage.getItem(BASE_KEY) ?? DEFAULT_BASE;
  }

  async init(): Promise<void> {
    this.root.innerHTML = SKELETON;
    const base = this.input("base-url");
    base.value = this.baseUrl;
    base.addEventListener("change", () => {
      this.baseUrl = base.value.trim();
      localStorage.setItem(BASE_KEY, this.baseUrl);
    });
    this.form("setup-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.create();
    });
    this.form("offer-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.offer();
    });
    this.form("whatif-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.whatIf();
    });
    this.button("discard-btn").addEventListener("click", () => {
      void this.discard();
    });
    this.input("gamma-slider").addEventListener("change", (ev) => {
      const value = Number((ev.target as HTMLInputElement).value);
      void this.changeGamma(value);
    });

    const stored = localStorage.getItem(SESSION_KEY);
    if (stored !== null) {
      await this.load(stored);
    }
    this.render();
  }

  /** GET projection used on page load; the view must come out identical
   * to the one maintained incrementally during the original session. */
  async load(id: string): Promise<void> {
    try {
      this.doc = await getSession(this.baseUrl, id);
    } catch (err) {
      localStorage.removeItem(SESSION_KEY);
      this.showError(err);
    }
  }

  async create(): Promise<void> {
    const model = this.modelFromForm();
    if (model === null) {
      return;
    }
    await this.run(async () => {
      const resp = await createSession(this.baseUrl, model);
      this.doc = detailFromCreate(resp, model);
      this.overlays = [];
      localStorage.setItem(SESSION_KEY, resp.id);
      this.clearWhatIf();
    });
  }

  async offer(): Promise<void> {
    const doc = this.doc;
    const value = this.numberFrom("f-offer");
    if (doc === null || value === null) {
      return;
    }
    await this.run(async () => {
      const resp = await postOffer(this.baseUrl, doc.id, value);
      this.doc = applyOffer(doc, value, resp);
      this.input("f-offer").value = "";
    });
  }

  async whatIf(): Promise<void> {
    const doc = this.doc;
    const value = this.numberFrom("f-whatif");
    if (doc === null || value === null) {
      return;
    }
    await this.run(async () => {
      const resp = await whatIf(this.baseUrl, doc.id, value);
      this.renderWhatIf(value, resp);
    });
  }

  async changeGamma(gamma: number): Promise<void> {
    const doc = this.doc;
    if (doc === null || doc.model.utility.family !== "exponential") {
      return;
    }
    await this.run(async () => {
      this.overlays.push({
        gamma: doc.model.utility.gamma ?? 0,
        levels: [...doc.levels],
      });
      if (this.overlays.length > MAX_OVERLAYS) {
        this.overlays.shift();
      }
      const model: HouseModelJson = {
        ...doc.model,
        utility: { family: "exponential", gamma },
      };
      const resp = await createSession(this.baseUrl, model);
      this.doc = detailFromCreate(resp, model);
      localStorage.setItem(SESSION_KEY, resp.id);
      this.clearWhatIf();
    });
  }

  async discard(): Promise<void> {
    const doc = this.doc;
    if (doc === null) {
      return;
    }
    await this.run(async () => {
      await deleteSession(this.baseUrl, doc.id);
      this.doc = null;
      this.overlays = [];
      localStorage.removeItem(SESSION_KEY);
      this.clearWhatIf();
    });
  }

  /** Serialize one action at a time; submits stay disabled while a
   * request is in flight. */
  private async run(action: () => Promise<void>): Promise<void> {
    if (this.pending) {
      return;
    }
    this.pending = true;
    this.render();
    try {
      await action();
    } catch (err) {
      this.showError(err);
    } finally {
      this.pending = false;
      this.render();
    }
  }

  render(): void {
    const setup = this.section("setup");
    const session = this.section("session");
    this.button("create-btn").disabled = this.pending;
    if (this.doc === null) {
      setup.hidden = false;
      session.hidden = true;
      return;
    }
    setup.hidden = true;
    session.hidden = false;
    const view = buildView(this.doc);

    const banner = this.div("banner");
    banner.textContent =
      view.lastAdvice === null
        ? view.statusBanner
        : `${view.statusBanner} | advice: ${view.lastAdvice}`;
    banner.className = `banner ${view.status}`;
    this.div("model-summary").textContent = view.modelSummary;

    this.renderGamma(view);
    this.renderTimeline(view);

    const chart = this.div("timeline-chart");
    chart.replaceChildren(timelineChart(view, this.doc.levels, this.overlays));
    const post = this.div("posterior-chart");
    post.replaceChildren(posteriorChart(view));

    this.button("offer-btn").disabled = this.pending;
    this.button("whatif-btn").disabled = this.pending;
    this.button("discard-btn").disabled = this.pending;
    this.input("gamma-slider").disabled = this.pending;
  }

  private renderGamma(view: UiSessionView): void {
    const panel = this.div("gamma-panel");
    if (view.gamma === null) {
      panel.hidden = true;
      return;
    }
    panel.hidden = false;
    const slider = this.input("gamma-slider");
    slider.value = String(view.gamma);
    const label = this.root.querySelector("#gamma-value") as HTMLElement;
    label.textContent = fmt(view.gamma, 2);
  }

  private renderTimeline(view: UiSessionView): void {
    const body = this.root.querySelector("#timeline tbody") as HTMLElement;
    body.replaceChildren(
      ...view.timeline.map((row) => {
        const tr = document.createElement("tr");
        tr.dataset.stage = String(row.stage);
        tr.dataset.advice = row.advice;
        tr.className = row.advice === "stop" ? "stop" : "";
        for (const text of [
          String(row.stage),
          fmt(row.offer),
          fmt(row.level),
          row.advice,
        ]) {
          const td = document.createElement("td");
          td.textContent = text;
          tr.appendChild(td);
        }
        return tr;
      }),
    );
  }

  private renderWhatIf(offer: number, resp: WhatIfResponse): void {
    const box = this.div("whatif-result");
    box.dataset.advice = resp.advice;
    box.textContent =
      `offer ${fmt(offer)}: ${resp.advice}` +
      ` | stage after ${resp.hypothetical_stage}` +
      `, level ${fmt(resp.hypothetical_level)}` +
      `, posterior mean ${fmt(resp.hypothetical_posterior.predictive_mean)}`;
  }

  private clearWhatIf(): void {
    const box = this.div("whatif-result");
    box.textContent = "";
    delete box.dataset.advice;
  }

  private showError(err: unknown): void {
    const toast = this.div("toast");
    if (err instanceof ApiError) {
      let text = `${err.code}: ${err.message}`;
      if (err.status === 409) {
        text += " (start a new session to continue)";
      }
      toast.textContent = text;
    } else {
      toast.textContent = String(err);
    }
    toast.hidden = false;
  }

  private modelFromForm(): HouseModelJson | null {
    const custom = (
      this.root.querySelector("#f-custom") as HTMLTextAreaElement
    ).value.trim();
    if (custom !== "") {
      try {
        return JSON.parse(custom) as HouseModelJson;
      } catch (err) {
        this.showError(err);
        return null;
      }
    }
    const alpha = this.numberFrom("f-alpha");
    const beta = this.numberFrom("f-beta");
    const cost = this.numberFrom("f-cost");
    const horizon = this.numberFrom("f-horizon");
    const gamma = this.numberFrom("f-gamma");
    if (
      alpha === null ||
      beta === null ||
      cost === null ||
      horizon === null ||
      gamma === null
    ) {
      return null;
    }
    return {
      offers: { kind: "bernoulli" },
      prior: { kind: "beta_bernoulli", alpha, beta },
      cost,
      horizon,
      utility: { family: "exponential", gamma },
    };
  }

  private numberFrom(id: string): number | null {
    const value = Number(this.input(id).value);
    return Number.isFinite(value) ? value : null;
  }

  private input(id: string): HTMLInputElement {
    return this.root.querySelector(`#${id}`) as HTMLInputElement;
  }

  private form(id: string): HTMLFormElement {
    return this.root.querySelector(`#${id}`) as HTMLFormElement;
  }

  private button(id: string): HTMLButtonElement {
    return this.root.querySelector(`#${id}`) as HTMLButtonElement;
  }

  private div(id: string): HTMLElement {
    return this.root.querySelector(`#${id}`) as HTMLElement;
  }

  private section(id: string): HTMLElement {
    return this.root.querySelector(`#${id}`) as HTMLElement;
  }
}
