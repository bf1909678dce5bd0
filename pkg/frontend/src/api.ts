// Thin typed client over the service's JSON API. Every request the UI makes
// goes through here, so the endpoint surface stays the documented one.

export interface Preset {
  id: string;
  label: string;
  max_duration_sec: number;
  aspect: string;
}

export interface JobStatus {
  job_id: string;
  state: string;
  stage: string | null;
  progress: number;
  label: string;
  error: string | null;
  updated: number;
}

export interface JobResult {
  job_id: string;
  fragments: number[][];
  summary_frames: number;
  summary_duration_sec: number;
  width: number;
  height: number;
  download: string;
  [key: string]: unknown;
}

export const TERMINAL_STATES = ["done", "failed"];

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function check(resp: Response): Promise<Response> {
  if (!resp.ok) {
    let message = `${resp.status}`;
    try {
      const body = await resp.json();
      if (body && body.error) message = body.error;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, message);
  }
  return resp;
}

export class ApiClient {
  constructor(private base: string = "") {}

  url(path: string): string {
    return this.base + path;
  }

  async listPresets(): Promise<Preset[]> {
    const resp = await check(await fetch(this.url("/api/v1/presets")));
    return resp.json();
  }

  async submitFile(
    file: File,
    spec: { preset?: string; custom?: { duration_sec: number; aspect: string } },
  ): Promise<string> {
    const form = new FormData();
    form.append("file", file);
    if (spec.preset) form.append("preset", spec.preset);
    if (spec.custom) form.append("custom", JSON.stringify(spec.custom));
    const resp = await check(
      await fetch(this.url("/api/v1/jobs"), { method: "POST", body: form }),
    );
    return (await resp.json()).job_id;
  }

  async submitUrl(
    url: string,
    spec: { preset?: string; custom?: { duration_sec: number; aspect: string } },
  ): Promise<string> {
    const resp = await check(
      await fetch(this.url("/api/v1/jobs"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ url, ...spec }),
      }),
    );
    return (await resp.json()).job_id;
  }

  async jobStatus(id: string): Promise<JobStatus> {
    const resp = await check(await fetch(this.url(`/api/v1/jobs/${id}`)));
    return resp.json();
  }

  async jobResult(id: string): Promise<JobResult> {
    const resp = await check(await fetch(this.url(`/api/v1/jobs/${id}/result`)));
    return resp.json();
  }

  downloadUrl(id: string): string {
    return this.url(`/api/v1/jobs/${id}/download`);
  }

  async deleteJob(id: string): Promise<void> {
    await check(await fetch(this.url(`/api/v1/jobs/${id}`), { method: "DELETE" }));
  }
}
