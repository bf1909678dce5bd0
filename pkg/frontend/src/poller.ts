// Periodic status polling for tracked jobs. One timer per job; polling stops
// at terminal states and on 404. Overlapping responses resolve by the
// server-side `updated` timestamp, latest wins.

import { ApiClient, ApiError, JobStatus, TERMINAL_STATES } from "./api.js";

export type PollUpdate =
  | { kind: "status"; status: JobStatus }
  | { kind: "removed"; jobId: string };

export class ProgressPoller {
  private timers = new Map<string, ReturnType<typeof setInterval>>();
  private lastSeen = new Map<string, number>();

  constructor(
    private api: ApiClient,
    private onUpdate: (update: PollUpdate) => void,
    private intervalMs: number = 2000,
  ) {}

  tracked(): string[] {
    return [...this.timers.keys()];
  }

  track(jobId: string): void {
    if (this.timers.has(jobId)) return;
    const timer = setInterval(() => void this.pollOnce(jobId), this.intervalMs);
    this.timers.set(jobId, timer);
    void this.pollOnce(jobId);
  }

  stop(jobId: string): void {
    const timer = this.timers.get(jobId);
    if (timer !== undefined) clearInterval(timer);
    this.timers.delete(jobId);
  }

  stopAll(): void {
    for (const id of this.tracked()) this.stop(id);
  }

  async pollOnce(jobId: string): Promise<void> {
    let status: JobStatus;
    try {
      status = await this.api.jobStatus(jobId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.stop(jobId);
        this.onUpdate({ kind: "removed", jobId });
      }
      // transient errors: keep the timer, retry next tick
      return;
    }
    const seen = this.lastSeen.get(jobId) ?? 0;
    if (status.updated < seen) return; // stale overlapping response
    this.lastSeen.set(jobId, status.updated);
    if (TERMINAL_STATES.includes(status.state)) this.stop(jobId);
    this.onUpdate({ kind: "status", status });
  }
}
