// Page wiring: submission form, live progress rows, dual-player results view.

import { ApiClient, ApiError, JobStatus } from "./api.js";
import { ProgressPoller } from "./poller.js";
import { forgetJob, loadTrackedJobs, rememberJob } from "./store.js";
import { validateCustom } from "./validate.js";

export interface AppOptions {
  base?: string;
  pollIntervalMs?: number;
}

export class App {
  readonly api: ApiClient;
  readonly poller: ProgressPoller;
  // object URLs of files uploaded this session, for the "original" player
  private originals = new Map<string, string>();
  private doc: Document;
  private storage: Storage;

  constructor(doc: Document, storage: Storage, opts: AppOptions = {}) {
    this.doc = doc;
    this.storage = storage;
    this.api = new ApiClient(opts.base ?? "");
    this.poller = new ProgressPoller(
      this.api,
      (update) => this.onPollUpdate(update),
      opts.pollIntervalMs ?? 2000,
    );
  }

  private el<T extends HTMLElement>(id: string): T {
    const found = this.doc.getElementById(id);
    if (!found) throw new Error(`missing element #${id}`);
    return found as T;
  }

  async start(): Promise<void> {
    await this.populatePresets();
    this.wireForm();
    for (const job of loadTrackedJobs(this.storage)) {
      this.ensureRow(job.id, job.label);
      this.poller.track(job.id);
    }
    this.doc.defaultView?.addEventListener("hashchange", () => void this.route());
    await this.route();
  }

  private async populatePresets(): Promise<void> {
    const select = this.el<HTMLSelectElement>("preset-select");
    const presets = await this.api.listPresets();
    for (const preset of presets) {
      const option = this.doc.createElement("option");
      option.value = preset.id;
      option.textContent = `${preset.label} (${preset.max_duration_sec}s, ${preset.aspect})`;
      select.appendChild(option);
    }
    const custom = this.doc.createElement("option");
    custom.value = "__custom__";
    custom.textContent = "Custom…";
    select.appendChild(custom);
    select.addEventListener("change", () => {
      this.el("custom-fields").hidden = select.value !== "__custom__";
    });
  }

  private formError(message: string): void {
    const box = this.el("form-error");
    box.textContent = message;
    box.hidden = !message;
  }

  private wireForm(): void {
    const form = this.el<HTMLFormElement>("submit-form");
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
  }

  async submit(): Promise<string | null> {
    this.formError("");
    const select = this.el<HTMLSelectElement>("preset-select");
    const urlInput = this.el<HTMLInputElement>("url-input");
    const fileInput = this.el<HTMLInputElement>("file-input");

    let spec: { preset?: string; custom?: { duration_sec: number; aspect: string } };
    if (select.value === "__custom__") {
      const duration = this.el<HTMLInputElement>("duration-input").value;
      const aspect = this.el<HTMLInputElement>("aspect-input").value;
      const checked = validateCustom(duration, aspect);
      if (!checked.ok) {
        this.formError(checked.error);
        return null;
      }
      spec = { custom: { duration_sec: checked.value.durationSec, aspect: checked.value.aspect } };
    } else {
      spec = { preset: select.value };
    }

    const file = fileInput.files && fileInput.files[0];
    const url = urlInput.value.trim();
    if (!file && !url) {
      this.formError("Choose a video file or enter a URL");
      return null;
    }

    try {
      let jobId: string;
      let label: string;
      if (file) {
        jobId = await this.api.submitFile(file, spec);
        label = file.name;
        this.originals.set(jobId, URL.createObjectURL(file));
      } else {
        jobId = await this.api.submitUrl(url, spec);
        label = url.split("/").pop() || url;
        this.originals.set(jobId, url);
      }
      rememberJob(this.storage, { id: jobId, label });
      this.ensureRow(jobId, label);
      this.poller.track(jobId);
      form_reset(this.doc);
      return jobId;
    } catch (err) {
      this.formError(err instanceof Error ? err.message : String(err));
      return null;
    }
  }

  ensureRow(jobId: string, label: string): HTMLElement {
    const existing = this.doc.getElementById(`job-${jobId}`);
    if (existing) return existing;
    const row = this.doc.createElement("li");
    row.id = `job-${jobId}`;
    row.className = "job-row";
    row.innerHTML = `
      <span class="job-label"></span>
      <span class="job-stage">queued</span>
      <span class="progress-track"><span class="progress-bar" style="width:0%"></span></span>
      <span class="job-percent">0%</span>
      <span class="job-actions"></span>`;
    (row.querySelector(".job-label") as HTMLElement).textContent = label;
    this.el("job-list").appendChild(row);
    return row;
  }

  private onPollUpdate(update: { kind: string; status?: JobStatus; jobId?: string }): void {
    if (update.kind === "removed" && update.jobId) {
      const row = this.doc.getElementById(`job-${update.jobId}`);
      if (row) {
        (row.querySelector(".job-stage") as HTMLElement).textContent = "removed";
        row.classList.add("job-removed");
      }
      forgetJob(this.storage, update.jobId);
      return;
    }
    const status = update.status;
    if (!status) return;
    const row = this.ensureRow(status.job_id, status.label);
    const stage = row.querySelector(".job-stage") as HTMLElement;
    const bar = row.querySelector(".progress-bar") as HTMLElement;
    const percent = row.querySelector(".job-percent") as HTMLElement;
    const actions = row.querySelector(".job-actions") as HTMLElement;
    const pct = Math.round(status.progress * 100);
    bar.style.width = `${pct}%`;
    percent.textContent = `${pct}%`;
    if (status.state === "failed") {
      stage.textContent = `failed: ${status.error ?? "unknown error"}`;
      row.classList.add("job-failed");
      actions.innerHTML = "";
    } else if (status.state === "done") {
      stage.textContent = "done";
      row.classList.add("job-done");
      actions.innerHTML = `<a href="#/job/${status.job_id}">results</a>`;
    } else {
      stage.textContent = status.stage ?? status.state;
    }
  }

  // hash routing: "" = landing (form + progress), "#/job/<id>" = results page
  async route(): Promise<void> {
    const hash = this.doc.defaultView?.location.hash ?? "";
    const match = /^#\/job\/([A-Za-z0-9]+)$/.exec(hash);
    const landing = this.el("landing-view");
    const results = this.el("results-view");
    if (!match) {
      landing.hidden = false;
      results.hidden = true;
      return;
    }
    await this.showResults(match[1]);
  }

  async showResults(jobId: string): Promise<void> {
    const landing = this.el("landing-view");
    const results = this.el("results-view");
    const notice = this.el("results-notice");
    const players = this.el("players");
    notice.textContent = "";
    notice.hidden = true;
    players.hidden = true;

    let status: JobStatus;
    try {
      status = await this.api.jobStatus(jobId);
    } catch (err) {
      landing.hidden = false;
      results.hidden = true;
      return;
    }
    if (status.state !== "done") {
      // still running or failed: back to the progress view
      if (this.doc.defaultView) this.doc.defaultView.location.hash = "";
      landing.hidden = false;
      results.hidden = true;
      this.ensureRow(jobId, status.label);
      if (status.state !== "failed") this.poller.track(jobId);
      return;
    }

    landing.hidden = true;
    results.hidden = false;
    try {
      const result = await this.api.jobResult(jobId);
      players.hidden = false;
      const original = this.el<HTMLVideoElement>("player-original");
      const summary = this.el<HTMLVideoElement>("player-summary");
      const originalSrc = this.originals.get(jobId);
      if (originalSrc) {
        original.src = originalSrc;
        this.el("original-missing").hidden = true;
      } else {
        original.removeAttribute("src");
        this.el("original-missing").hidden = false;
      }
      summary.src = this.api.downloadUrl(jobId);
      const link = this.el<HTMLAnchorElement>("download-link");
      link.href = this.api.downloadUrl(jobId);
      link.setAttribute("download", `${status.label || jobId}-summary`);
      this.el("results-meta").textContent =
        `${result.summary_duration_sec.toFixed(2)}s, ` +
        `${result.width}x${result.height}, ${result.summary_frames} frames`;
    } catch (err) {
      players.hidden = true;
      notice.hidden = false;
      notice.textContent =
        err instanceof ApiError && err.status === 410
          ? "This summary has expired and its files were purged."
          : `Result unavailable: ${err instanceof Error ? err.message : err}`;
    }
  }
}

function form_reset(doc: Document): void {
  const form = doc.getElementById("submit-form") as HTMLFormElement | null;
  form?.reset();
  const customFields = doc.getElementById("custom-fields");
  if (customFields) customFields.hidden = true;
}

export async function initApp(doc: Document, opts: AppOptions = {}): Promise<App> {
  const storage = doc.defaultView!.localStorage;
  const app = new App(doc, storage, opts);
  await app.start();
  return app;
}
