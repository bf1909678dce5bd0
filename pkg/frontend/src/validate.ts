// Client-side validation of the custom duration/aspect fields.

export interface CustomSpec {
  durationSec: number;
  aspect: string;
}

export type ValidationResult =
  | { ok: true; value: CustomSpec }
  | { ok: false; error: string };

const ASPECT_PATTERN = /^(\d+):(\d+)$/;

export function validateCustom(durationRaw: string, aspectRaw: string): ValidationResult {
  const duration = Number(durationRaw.trim());
  if (!durationRaw.trim() || !Number.isFinite(duration) || duration <= 0) {
    return { ok: false, error: "Duration must be a positive number of seconds" };
  }
  const aspect = aspectRaw.trim();
  const match = ASPECT_PATTERN.exec(aspect);
  if (!match) {
    return { ok: false, error: "Aspect ratio must look like W:H, e.g. 9:16" };
  }
  if (Number(match[1]) < 1 || Number(match[2]) < 1) {
    return { ok: false, error: "Aspect ratio terms must be at least 1" };
  }
  return { ok: true, value: { durationSec: duration, aspect } };
}
