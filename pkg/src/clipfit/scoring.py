"""Per-frame importance scores in [0, 1].

Scores come from an external summarization model (file import) or from the
built-in motion-magnitude baseline.
"""

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


class ParseError(ValueError):
    """Score file is malformed."""


class LengthMismatch(ValueError):
    """Score count differs from the video's frame count."""


class RangeError(ValueError):
    """A score lies outside [0, 1]."""


@dataclass(frozen=True)
class ImportanceSeries:
    scores: np.ndarray = field(compare=False)

    def __post_init__(self):
        arr = np.asarray(self.scores, dtype=np.float64).ravel()
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise RangeError("importance scores must lie in [0, 1]")
        object.__setattr__(self, "scores", arr)

    def __len__(self):
        return len(self.scores)


def import_scores(path: str, frame_count: int) -> ImportanceSeries:
    """Load one float per frame from JSON array or one-per-line text.

    The format is auto-detected: a leading '[' means JSON. Scores outside
    [0, 1] are rejected, not rescaled.
    """
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    text = raw.decode("utf-8", errors="strict") if raw else ""
    stripped = text.lstrip()
    try:
        if stripped.startswith("["):
            values = json.loads(stripped)
            if not isinstance(values, list):
                raise ParseError(f"{path}: JSON payload is not an array")
            values = [float(v) for v in values]
        else:
            values = [float(line) for line in text.splitlines() if line.strip()]
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if len(values) != frame_count:
        raise LengthMismatch(f"{path}: {len(values)} scores for {frame_count} frames")
    arr = np.asarray(values, dtype=np.float64)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        bad = arr[(arr < 0.0) | (arr > 1.0)][0]
        raise RangeError(f"{path}: score {bad} outside [0, 1]")
    return ImportanceSeries(arr)


def normalize_motion(raw: np.ndarray) -> ImportanceSeries:
    """Min-max normalize a raw motion signal; an all-equal signal maps to zeros."""
    raw = np.asarray(raw, dtype=np.float64)
    lo, hi = float(raw.min()), float(raw.max())
    if hi - lo <= 0.0:
        return ImportanceSeries(np.zeros_like(raw))
    return ImportanceSeries((raw - lo) / (hi - lo))


def baseline_scores(frames: Iterable) -> ImportanceSeries:
    """Motion-magnitude baseline from consecutive-frame grayscale differences.

    score[i] is the mean absolute per-pixel grayscale difference between
    frames i and i-1 (score[0] repeats score[1]), min-max normalized over the
    whole video; a static video scores all zeros.
    """
    from .saliency import _to_gray

    raw = []
    prev = None
    for frame in frames:
        pixels = frame.pixels if hasattr(frame, "pixels") else frame
        gray = _to_gray(np.asarray(pixels))
        if prev is not None:
            raw.append(float(np.abs(gray - prev).mean()))
        prev = gray
    if prev is None:
        raise ValueError("baseline_scores needs at least one frame")
    if not raw:
        return ImportanceSeries(np.zeros(1))
    raw = [raw[0]] + raw  # score[0] = score[1]
    return normalize_motion(np.asarray(raw))
