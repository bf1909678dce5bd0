// Tracked job ids live in localStorage so the job list survives reloads;
// everything else about a job is re-fetched from the API.

export interface TrackedJob {
  id: string;
  label: string;
}

const KEY = "clipfit.jobs";

export function loadTrackedJobs(storage: Storage): TrackedJob[] {
  try {
    const raw = storage.getItem(KEY);
    if (!raw) return [];
    const parsed = JSON.parse(raw);
    if (!Array.isArray(parsed)) return [];
    return parsed.filter((j) => j && typeof j.id === "string");
  } catch {
    return [];
  }
}

export function rememberJob(storage: Storage, job: TrackedJob): void {
  const jobs = loadTrackedJobs(storage).filter((j) => j.id !== job.id);
  jobs.push(job);
  storage.setItem(KEY, JSON.stringify(jobs));
}

export function forgetJob(storage: Storage, jobId: string): void {
  const jobs = loadTrackedJobs(storage).filter((j) => j.id !== jobId);
  storage.setItem(KEY, JSON.stringify(jobs));
}
