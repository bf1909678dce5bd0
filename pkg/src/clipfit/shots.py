"""Temporal partition of a video into shots.

Shots either come from an external detector (JSON import) or from the
built-in detector: chi-square distance between 64-bin grayscale histograms
of consecutive frames, cut where the distance exceeds an adaptive threshold.
"""

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

HIST_BINS = 64


class ParseError(ValueError):
    """Shot file is not valid JSON of [start, end] pairs."""


class PartitionError(ValueError):
    """Shots do not tile the frame range exactly."""


@dataclass(frozen=True)
class Shot:
    index: int
    start_frame: int
    end_frame: int

    def __post_init__(self):
        if self.start_frame > self.end_frame:
            raise ValueError(f"shot {self.index}: start {self.start_frame} > end {self.end_frame}")

    @property
    def length(self) -> int:
        return self.end_frame - self.start_frame + 1


def validate_partition(shots: Sequence[Shot], frame_count: int) -> None:
    """Shots must be sorted, non-overlapping and cover [0, frame_count-1]."""
    if not shots:
        raise PartitionError("no shots")
    if shots[0].start_frame != 0:
        raise PartitionError(f"first shot starts at {shots[0].start_frame}, not 0")
    for prev, cur in zip(shots, shots[1:]):
        if cur.start_frame != prev.end_frame + 1:
            raise PartitionError(
                f"gap or overlap between frames {prev.end_frame} and {cur.start_frame}"
            )
    if shots[-1].end_frame != frame_count - 1:
        raise PartitionError(
            f"last shot ends at {shots[-1].end_frame}, video ends at {frame_count - 1}"
        )


def grayscale_histogram(gray: np.ndarray) -> np.ndarray:
    """Normalized 64-bin histogram of a grayscale image (values in [0, 256))."""
    bins = np.clip(gray.astype(np.int64) >> 2, 0, HIST_BINS - 1)
    hist = np.bincount(bins.ravel(), minlength=HIST_BINS).astype(np.float64)
    total = hist.sum()
    return hist / total if total > 0 else hist


def chi_square_distance(h1: np.ndarray, h2: np.ndarray) -> float:
    num = (h1 - h2) ** 2
    den = h1 + h2
    mask = den > 0
    return float(0.5 * (num[mask] / den[mask]).sum())


def boundaries_from_distances(
    distances: Sequence[float], min_shot_len: int, sensitivity: float
) -> list:
    """Frame indices where a new shot starts, threshold mu + sensitivity*sigma.

    distances[i] is the distance between frames i and i+1; a value above the
    threshold starts a new shot at frame i+1. Boundaries closer than
    min_shot_len to the previous accepted boundary are suppressed.
    """
    if not len(distances):
        return []
    d = np.asarray(distances, dtype=np.float64)
    mu = float(d.mean())
    sigma = float(d.std())
    threshold = mu + sensitivity * sigma
    boundaries = []
    last = 0
    for i, value in enumerate(d):
        b = i + 1
        if value > threshold and b - last >= min_shot_len:
            boundaries.append(b)
            last = b
    return boundaries


def shots_from_boundaries(boundaries: Sequence[int], frame_count: int) -> list:
    starts = [0] + list(boundaries)
    ends = list(boundaries) + [frame_count]
    return [Shot(i, s, e - 1) for i, (s, e) in enumerate(zip(starts, ends))]


def detect_shots(
    frames: Iterable, min_shot_len: int = 10, sensitivity: float = 3.0
) -> list:
    """Detect hard cuts in a stream of frames.

    Works in one pass over the frames, keeping only per-frame histograms'
    pairwise distances; a single all-video shot is a legal result.
    """
    if min_shot_len < 1:
        raise ValueError("min_shot_len must be >= 1")
    from .saliency import _to_gray

    distances = []
    prev_hist = None
    count = 0
    for frame in frames:
        pixels = frame.pixels if hasattr(frame, "pixels") else frame
        hist = grayscale_histogram(_to_gray(np.asarray(pixels)))
        if prev_hist is not None:
            distances.append(chi_square_distance(prev_hist, hist))
        prev_hist = hist
        count += 1
    if count == 0:
        raise ValueError("detect_shots needs at least one frame")
    boundaries = boundaries_from_distances(distances, min_shot_len, sensitivity)
    shots = shots_from_boundaries(boundaries, count)
    validate_partition(shots, count)
    return shots


def import_shots(path: str, frame_count: int) -> list:
    """Load a shot partition from a JSON array of inclusive [start, end] pairs."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise ParseError(f"{path}: expected a non-empty JSON array of pairs")
    shots = []
    for i, item in enumerate(data):
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in item)
        ):
            raise ParseError(f"{path}: entry {i} is not an integer pair")
        if item[0] > item[1]:
            raise PartitionError(f"{path}: entry {i} has start {item[0]} > end {item[1]}")
        shots.append(Shot(i, item[0], item[1]))
    if shots[-1].end_frame > frame_count - 1:
        raise PartitionError(
            f"{path}: shots end at {shots[-1].end_frame}, video has {frame_count} frames"
        )
    validate_partition(shots, frame_count)
    return shots
