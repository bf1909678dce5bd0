// Full UI flow against a live service instance (spawned as a subprocess).

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { App, initApp } from "../src/app.js";

const PORT = 18000 + Math.floor(Math.random() * 2000);
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess;

function buildRvid(frames: number, width: number, height: number): Uint8Array {
  const header = new Uint8Array(24);
  header.set([0x52, 0x56, 0x49, 0x44]); // RVID
  const view = new DataView(header.buffer);
  view.setUint32(4, width, true);
  view.setUint32(8, height, true);
  view.setUint32(12, 25, true); // fps numerator
  view.setUint32(16, 1, true); // fps denominator
  view.setUint32(20, frames, true);
  const payload = new Uint8Array(frames * width * height * 3);
  for (let f = 0; f < frames; f++) {
    const gray = f < frames / 2 ? 30 : 220; // one hard cut in the middle
    payload.fill(gray, f * width * height * 3, (f + 1) * width * height * 3);
  }
  const out = new Uint8Array(header.length + payload.length);
  out.set(header);
  out.set(payload, header.length);
  return out;
}

let serviceLog = "";

async function waitForService(): Promise<void> {
  const deadline = Date.now() + 60_000;
  let lastError: unknown;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/api/v1/presets`);
      if (resp.ok) return;
    } catch (err) {
      lastError = err;
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error(`service never became ready: ${lastError}\n${serviceLog}`);
}

function loadPage(): void {
  // the bundle is served from the service origin in production; mirror that
  (window as any).happyDOM.setURL(`${BASE}/`);
  const html = readFileSync(join(__dirname, "..", "src", "index.html"), "utf-8");
  const body = /<body>([\s\S]*)<\/body>/.exec(html);
  document.body.innerHTML = body ? body[1] : "";
  localStorage.clear();
  location.hash = "";
}

beforeAll(async () => {
  (window as any).happyDOM.setURL(`${BASE}/`); // same-origin, as served in production
  const dataDir = mkdtempSync(join(tmpdir(), "clipfit-ui-"));
  const confPath = join(dataDir, "service.conf");
  writeFileSync(
    confPath,
    `listen_addr = 127.0.0.1:${PORT}\ndata_dir = ${dataDir}\nworkers = 2\n`,
  );
  service = spawn("python3", ["-m", "clipfit.cli", "serve", "--config", confPath], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  service.stdout?.on("data", (chunk) => (serviceLog += chunk));
  service.stderr?.on("data", (chunk) => (serviceLog += chunk));
  await waitForService();
});

afterAll(() => {
  service?.kill();
});

describe("UI flow against a live service", () => {
  it("blocks an invalid custom aspect client-side, without any request", async () => {
    loadPage();
    const app = await initApp(document, { base: "", pollIntervalMs: 100 });
    const posts: string[] = [];
    const realFetch = globalThis.fetch;
    const spy = vi
      .spyOn(globalThis, "fetch")
      .mockImplementation(async (input: any, init?: any) => {
        if (init?.method === "POST") posts.push(String(input));
        return realFetch(input, init);
      });
    try {
      const select = document.getElementById("preset-select") as HTMLSelectElement;
      select.value = "__custom__";
      (document.getElementById("duration-input") as HTMLInputElement).value = "20";
      (document.getElementById("aspect-input") as HTMLInputElement).value = "abc";
      (document.getElementById("url-input") as HTMLInputElement).value =
        `${BASE}/never-fetched.mp4`;
      const jobId = await app.submit();
      expect(jobId).toBeNull();
      const error = document.getElementById("form-error")!;
      expect(error.hidden).toBe(false);
      expect(error.textContent).toMatch(/aspect/i);
      expect(posts).toHaveLength(0);
    } finally {
      spy.mockRestore();
      app.poller.stopAll();
    }
  });

  it("runs submit -> progress -> results -> download with a preset", async () => {
    loadPage();
    const app = await initApp(document, { base: "", pollIntervalMs: 100 });

    // presets arrived from the API
    const select = document.getElementById("preset-select") as HTMLSelectElement;
    const values = [...select.querySelectorAll("option")].map((o) => o.value);
    expect(values).toContain("instagram-story");
    select.value = "instagram-story";

    // attach a small clip; happy-dom inputs accept a plain files array
    const file = new File([buildRvid(50, 160, 96)], "holiday.rvid");
    const fileInput = document.getElementById("file-input") as HTMLInputElement;
    Object.defineProperty(fileInput, "files", { value: [file], configurable: true });

    const jobId = await app.submit();
    expect(jobId).toBeTruthy();

    // a progress row appeared without a reload
    const row = document.getElementById(`job-${jobId}`)!;
    expect(row).toBeTruthy();

    // the row advances to done with a full bar
    const deadline = Date.now() + 60_000;
    const stage = row.querySelector(".job-stage") as HTMLElement;
    const seen: string[] = [];
    while (Date.now() < deadline) {
      if (!seen.length || seen[seen.length - 1] !== stage.textContent) {
        seen.push(stage.textContent ?? "");
      }
      if (stage.textContent === "done" || stage.textContent?.startsWith("failed")) break;
      await new Promise((r) => setTimeout(r, 50));
    }
    expect(stage.textContent).toBe("done");
    expect((row.querySelector(".progress-bar") as HTMLElement).style.width).toBe("100%");
    expect(seen.length).toBeGreaterThan(1); // it visibly advanced through stages
    expect(row.querySelector(".job-actions a")!.getAttribute("href")).toBe(`#/job/${jobId}`);

    // results page: two players and a working download link
    location.hash = `#/job/${jobId}`;
    await app.showResults(jobId!);
    expect(document.getElementById("results-view")!.hidden).toBe(false);
    expect(document.getElementById("players")!.hidden).toBe(false);
    const original = document.getElementById("player-original") as HTMLVideoElement;
    const summary = document.getElementById("player-summary") as HTMLVideoElement;
    expect(original.getAttribute("src")).toBeTruthy(); // object URL from this session
    expect(summary.getAttribute("src")).toContain(`/api/v1/jobs/${jobId}/download`);
    const link = document.getElementById("download-link") as HTMLAnchorElement;
    expect(link.getAttribute("href")).toContain(`/download`);
    const media = await fetch(`${BASE}/api/v1/jobs/${jobId}/download`);
    expect(media.ok).toBe(true);
    const bytes = await media.arrayBuffer();
    expect(bytes.byteLength).toBeGreaterThan(100);

    // tracked job survives a "reload": a fresh app rebuilds the row from storage
    document.getElementById("job-list")!.innerHTML = "";
    const app2 = await initApp(document, { base: "", pollIntervalMs: 100 });
    await new Promise((r) => setTimeout(r, 300));
    expect(document.getElementById(`job-${jobId}`)).toBeTruthy();
    app2.poller.stopAll();
    app.poller.stopAll();
  });

  it("redirects to the progress view when a job is still running", async () => {
    loadPage();
    const app = await initApp(document, { base: "", pollIntervalMs: 100 });
    location.hash = "#/job/doesnotexist";
    await app.route();
    expect(document.getElementById("landing-view")!.hidden).toBe(false);
    expect(document.getElementById("results-view")!.hidden).toBe(true);
    app.poller.stopAll();
  });
});
