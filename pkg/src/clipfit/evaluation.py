"""Benchmark measurement protocols: F-score of machine summaries against
multi-annotator ground truth, and worst/best/mean IoU of crop windows."""

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cropping import CropWindow


class LengthMismatch(ValueError):
    """Vectors being compared have different lengths."""


class FrameCountMismatch(ValueError):
    """Machine windows and annotations cover different frame counts."""


@dataclass(frozen=True)
class UserSummarySet:
    """Per-annotator binary inclusion vectors, one entry per frame."""

    users: tuple

    def __post_init__(self):
        users = tuple(np.asarray(u, dtype=np.int8) for u in self.users)
        if not users:
            raise ValueError("at least one annotator required")
        length = len(users[0])
        if any(len(u) != length for u in users):
            raise LengthMismatch("annotator summaries differ in length")
        object.__setattr__(self, "users", users)

    @property
    def frame_count(self) -> int:
        return len(self.users[0])


@dataclass(frozen=True)
class CropAnnotationSet:
    """Per-annotator ground-truth crop windows, frame-aligned."""

    annotators: tuple  # tuple of per-frame CropWindow tuples

    def __post_init__(self):
        if not self.annotators:
            raise ValueError("at least one annotator required")
        length = len(self.annotators[0])
        if any(len(a) != length for a in self.annotators):
            raise FrameCountMismatch("annotators cover different frame counts")

    @property
    def frame_count(self) -> int:
        return len(self.annotators[0])


def fscore(machine: Sequence[int], user: Sequence[int]):
    """(precision, recall, f1) of two binary per-frame inclusion vectors.

    Any zero denominator makes the affected quantity 0.
    """
    m = np.asarray(machine, dtype=bool)
    u = np.asarray(user, dtype=bool)
    if len(m) != len(u):
        raise LengthMismatch(f"machine has {len(m)} frames, user {len(u)}")
    overlap = int(np.count_nonzero(m & u))
    m_total = int(np.count_nonzero(m))
    u_total = int(np.count_nonzero(u))
    precision = overlap / m_total if m_total else 0.0
    recall = overlap / u_total if u_total else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def fscore_protocol(machine: Sequence[int], users: UserSummarySet, mode: str = "mean") -> float:
    """Aggregate per-annotator F1: max (SumMe-style) or mean (TVSum-style)."""
    if mode not in ("max", "mean"):
        raise ValueError(f"mode must be 'max' or 'mean', got {mode!r}")
    scores = [fscore(machine, u)[2] for u in users.users]
    return max(scores) if mode == "max" else float(np.mean(scores))


def iou(a: CropWindow, b: CropWindow) -> float:
    """Intersection over union of two axis-aligned rectangles."""
    ix = max(0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    union = a.w * a.h + b.w * b.h - inter
    return inter / union if union else 0.0


def iou_report(machine: Sequence[CropWindow], annotations: CropAnnotationSet):
    """(worst, best, mean) of per-annotator mean frame IoU, as percentages."""
    if len(machine) != annotations.frame_count:
        raise FrameCountMismatch(
            f"machine covers {len(machine)} frames, annotations {annotations.frame_count}"
        )
    per_user = [
        float(np.mean([iou(m, g) for m, g in zip(machine, user)]))
        for user in annotations.annotators
    ]
    return (
        min(per_user) * 100.0,
        max(per_user) * 100.0,
        float(np.mean(per_user)) * 100.0,
    )


def load_summary_annotations(path: str) -> UserSummarySet:
    """JSON schema: {"frame_count": N, "users": [{"summary": [0/1, ...]}, ...]}."""
    with open(path) as fh:
        data = json.load(fh)
    frame_count = int(data["frame_count"])
    users = [u["summary"] for u in data["users"]]
    for u in users:
        if len(u) != frame_count:
            raise LengthMismatch(f"{path}: summary length {len(u)} != {frame_count}")
    return UserSummarySet(tuple(users))


def load_crop_annotations(path: str) -> CropAnnotationSet:
    """JSON schema: {"frames": [{"user_windows": [[x, y, w, h], ...]}, ...]}."""
    with open(path) as fh:
        data = json.load(fh)
    frames = data["frames"]
    if not frames:
        raise ValueError(f"{path}: no frames")
    n_users = len(frames[0]["user_windows"])
    if n_users == 0:
        raise ValueError(f"{path}: no annotators")
    annotators = [[] for _ in range(n_users)]
    for i, frame in enumerate(frames):
        windows = frame["user_windows"]
        if len(windows) != n_users:
            raise FrameCountMismatch(f"{path}: frame {i} lists {len(windows)} annotators")
        for u, (x, y, w, h) in enumerate(windows):
            annotators[u].append(CropWindow(int(x), int(y), int(w), int(h)))
    return CropAnnotationSet(tuple(tuple(a) for a in annotators))


def format_percent(value: float) -> str:
    return f"{value:.1f}"


def fscore_table(rows: Sequence[dict]) -> str:
    """Plain-text table of F-score results; rows carry label/max/mean keys."""
    lines = [f"{'Video':<24} {'F(max)':>8} {'F(mean)':>8}"]
    for row in rows:
        lines.append(
            f"{row['label']:<24} {format_percent(row['max'] * 100):>8} "
            f"{format_percent(row['mean'] * 100):>8}"
        )
    return "\n".join(lines)


def iou_table(rows: Sequence[dict]) -> str:
    """Plain-text table mirroring the worst/best/mean IoU report shape."""
    lines = [f"{'Video':<24} {'Worst':>7} {'Best':>7} {'Mean':>7}"]
    for row in rows:
        lines.append(
            f"{row['label']:<24} {format_percent(row['worst']):>7} "
            f"{format_percent(row['best']):>7} {format_percent(row['mean']):>7}"
        )
    return "\n".join(lines)
