/**
 * End to end: spawn the real advisor service, mount the app in jsdom,
 * and drive it through DOM events only, the way a browser session
 * would. Covers the scripted walkthrough (four zero offers at gamma
 * -1 end in a stop at stage 3), what-if purity, reload reconstruction
 * and the stale-session error path.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, beforeEach, describe, expect, it } from "vitest";

import { App } from "../src/app.js";
import { getSession } from "../src/client.js";

const PORT = 20000 + Math.floor(Math.random() * 20000);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let serverLog = "";

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "stopwise.cli", "serve", "--bind", `127.0.0.1:${PORT}`],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stdout?.on("data", (chunk) => (serverLog += chunk));
  server.stderr?.on("data", (chunk) => (serverLog += chunk));
  const deadline = Date.now() + 30000;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/sessions`);
      if (res.ok) return;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`service did not come up:\n${serverLog}`);
    }
    await new Promise((r) => setTimeout(r, 100));
  }
});

afterAll(() => {
  server?.kill();
});

beforeEach(() => {
  document.body.innerHTML = "";
  localStorage.clear();
  localStorage.setItem("advisor-ui:base", BASE);
});

async function waitFor(
  cond: () => boolean,
  what: string,
  timeout = 15000,
): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > timeout) {
      throw new Error(`timed out waiting for ${what}`);
    }
    await new Promise((r) => setTimeout(r, 25));
  }
}

async function mountApp(): Promise<{ root: HTMLElement; app: App }> {
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = new App(root);
  await app.init();
  return { root, app };
}

function q<T extends Element>(root: HTMLElement, sel: string): T {
  const node = root.querySelector(sel);
  if (node === null) throw new Error(`missing element ${sel}`);
  return node as T;
}

function setField(root: HTMLElement, sel: string, value: string): void {
  q<HTMLInputElement>(root, sel).value = value;
}

function submitForm(root: HTMLElement, sel: string): void {
  q<HTMLFormElement>(root, sel).dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

function rows(root: HTMLElement): HTMLTableRowElement[] {
  return [...root.querySelectorAll<HTMLTableRowElement>("#timeline tbody tr")];
}

function bannerText(root: HTMLElement): string {
  return q<HTMLElement>(root, "#banner").textContent ?? "";
}

async function createDefaultSession(
  root: HTMLElement,
  gamma = "-1",
): Promise<void> {
  setField(root, "#f-gamma", gamma);
  submitForm(root, "#setup-form");
  await waitFor(
    () => !q<HTMLElement>(root, "#session").hidden,
    "session to appear",
  );
}

async function sendOffer(root: HTMLElement, value: string): Promise<void> {
  const before = rows(root).length;
  setField(root, "#f-offer", value);
  submitForm(root, "#offer-form");
  await waitFor(() => rows(root).length === before + 1, "offer row");
}

describe("scripted advisor session", () => {
  it("stops on the fourth zero offer at gamma -1 and survives a reload", async () => {
    const { root } = await mountApp();
    await createDefaultSession(root);

    for (const value of ["0", "0", "0"]) {
      await sendOffer(root, value);
      expect(bannerText(root)).toContain("active");
    }
    await sendOffer(root, "0");

    const table = rows(root);
    expect(table).toHaveLength(4);
    expect(table.map((r) => r.dataset.advice)).toEqual([
      "continue",
      "continue",
      "continue",
      "stop",
    ]);
    const stopRow = table[3];
    expect(stopRow.dataset.stage).toBe("3");
    expect(stopRow.lastElementChild?.textContent).toBe("stop");

    expect(bannerText(root)).toContain("stopped: accepted 0 at stage 3");
    expect(bannerText(root)).toContain("wealth -0.3");
    expect(bannerText(root)).toContain("advice: stop");

    const marker = root.querySelector("svg circle.offer-dot.stop");
    expect(marker?.getAttribute("data-stage")).toBe("3");
    expect(root.querySelector("svg text.stop-label")?.textContent).toBe("STOP");

    // A reload is a fresh App over the same localStorage; the view is
    // rebuilt from GET /sessions/{id} and must come out identical.
    const timelineBefore = q<HTMLElement>(root, "#timeline tbody").innerHTML;
    const bannerBefore = bannerText(root);
    const { root: root2 } = await mountApp();
    await waitFor(
      () => !q<HTMLElement>(root2, "#session").hidden,
      "reloaded session",
    );
    expect(q<HTMLElement>(root2, "#timeline tbody").innerHTML).toBe(
      timelineBefore,
    );
    expect(bannerText(root2)).toBe(bannerBefore);
    expect(
      root2.querySelector("svg circle.offer-dot.stop")?.getAttribute("data-stage"),
    ).toBe("3");

    // Offers (or probes) against a stopped session surface the 409
    // verbatim and point at a restart.
    setField(root2, "#f-whatif", "0.5");
    submitForm(root2, "#whatif-form");
    await waitFor(
      () => !q<HTMLElement>(root2, "#toast").hidden,
      "stale-session toast",
    );
    const toast = q<HTMLElement>(root2, "#toast").textContent;
    expect(toast).toContain("session_stopped: session already stopped");
    expect(toast).toContain("start a new session");
  });

  it("stops immediately when the first offer clears the level", async () => {
    const { root } = await mountApp();
    await createDefaultSession(root);
    await sendOffer(root, "1");
    const table = rows(root);
    expect(table).toHaveLength(1);
    expect(table[0].dataset.advice).toBe("stop");
    expect(bannerText(root)).toContain("stopped: accepted 1 at stage 0");
    expect(bannerText(root)).toContain("wealth 1");
  });

  it("answers what-if without advancing the session", async () => {
    const { root } = await mountApp();
    await createDefaultSession(root);
    await sendOffer(root, "0");
    expect(bannerText(root)).toContain("active: stage 1");

    setField(root, "#f-whatif", "1");
    submitForm(root, "#whatif-form");
    await waitFor(
      () => (q<HTMLElement>(root, "#whatif-result").textContent ?? "") !== "",
      "what-if answer",
    );
    const result = q<HTMLElement>(root, "#whatif-result");
    expect(result.dataset.advice).toBe("stop");
    expect(result.textContent).toContain("stop");

    // The probe must not touch the real session, on screen or server side.
    expect(rows(root)).toHaveLength(1);
    expect(bannerText(root)).toContain("active: stage 1");
    const id = localStorage.getItem("advisor-ui:session") ?? "";
    const detail = await getSession(BASE, id);
    expect(detail.stage).toBe(1);
    expect(detail.history).toEqual([0]);
  });

  it("shows would-stop advice for a zero offer under strong risk aversion", async () => {
    const { root } = await mountApp();
    await createDefaultSession(root, "-3");
    setField(root, "#f-whatif", "0");
    submitForm(root, "#whatif-form");
    await waitFor(
      () => (q<HTMLElement>(root, "#whatif-result").textContent ?? "") !== "",
      "what-if answer",
    );
    expect(q<HTMLElement>(root, "#whatif-result").dataset.advice).toBe("stop");
    expect(rows(root)).toHaveLength(0);
    expect(bannerText(root)).toContain("active: stage 0");
  });

  it("restarts with an overlay when the gamma slider moves", async () => {
    const { root, app } = await mountApp();
    await createDefaultSession(root);
    await sendOffer(root, "0");
    const oldId = localStorage.getItem("advisor-ui:session");

    const slider = q<HTMLInputElement>(root, "#gamma-slider");
    slider.value = "-0.5";
    slider.dispatchEvent(new Event("change", { bubbles: true }));
    await waitFor(
      () => localStorage.getItem("advisor-ui:session") !== oldId,
      "new session after gamma change",
    );
    await waitFor(() => !app.pending, "gamma change to settle");

    expect(rows(root)).toHaveLength(0);
    expect(bannerText(root)).toContain("active: stage 0");
    const overlays = root.querySelectorAll("svg polyline.level-overlay");
    expect(overlays).toHaveLength(1);
    expect(
      root.querySelector("svg text.overlay-label")?.textContent,
    ).toBe("γ=-1");
    expect(q<HTMLElement>(root, "#gamma-value").textContent).toBe("-0.5");
  });
});
