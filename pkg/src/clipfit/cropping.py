"""Saliency-driven crop planning.

Turns per-frame saliency maps into a stable sequence of crop windows at the
target aspect ratio: isolate the dominant attention region by clustering the
map intensities, reduce it to a single focus point, smooth that point's
displacement over time, and cut a fixed-size window around it.
"""

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .saliency import SaliencyMap

class ImpossibleAspect(ValueError):
    """Target aspect ratio cannot be realized inside the frame."""


@dataclass(frozen=True)
class AspectRatio:
    """Reduced width:height ratio, e.g. 9:16 for vertical stories."""

    num: int
    den: int

    def __post_init__(self):
        if self.num < 1 or self.den < 1:
            raise ValueError("aspect ratio terms must be positive")
        g = math.gcd(self.num, self.den)
        if g != 1:
            object.__setattr__(self, "num", self.num // g)
            object.__setattr__(self, "den", self.den // g)

    @classmethod
    def parse(cls, text: str) -> "AspectRatio":
        parts = text.strip().split(":")
        if len(parts) != 2:
            raise ValueError(f"aspect ratio must look like W:H, got {text!r}")
        try:
            num, den = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"aspect ratio must be integer W:H, got {text!r}") from None
        return cls(num, den)

    @property
    def value(self) -> float:
        return self.num / self.den

    def __str__(self) -> str:
        return f"{self.num}:{self.den}"


@dataclass(frozen=True)
class FocusPoint:
    """Single attention center in frame pixel coordinates.

    confidence is the fraction of pre-filter saliency mass retained by the
    clustering filter; 0 means the frame carried no usable saliency.
    """

    x: float
    y: float
    confidence: float


@dataclass(frozen=True)
class CropWindow:
    x: int
    y: int
    w: int
    h: int

    def validate(self, frame_w: int, frame_h: int) -> None:
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"degenerate crop window {self}")
        if self.x < 0 or self.y < 0 or self.x + self.w > frame_w or self.y + self.h > frame_h:
            raise ValueError(f"crop window {self} exceeds {frame_w}x{frame_h} frame")

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.w, self.h)


def _kmeans_1d(values: np.ndarray, counts: np.ndarray, k: int):
    """Exact weighted 1-D k-means over sorted distinct values.

    The optimal 1-D clustering is contiguous in value order, so a dynamic
    program over contiguous partitions finds the global optimum; the
    divide-and-conquer split exploits the monotonicity of the optimal cut.
    Deterministic with no RNG; on cost ties the boundary value joins the
    lower cluster. Returns the cluster index of each distinct value.
    """
    d = len(values)
    w_pre = np.concatenate([[0.0], np.cumsum(counts)])
    s_pre = np.concatenate([[0.0], np.cumsum(values * counts)])
    q_pre = np.concatenate([[0.0], np.cumsum(values * values * counts)])

    def sse_span(i0: int, i1: int, j: int) -> np.ndarray:
        """Within-cluster squared error of spans [i, j] for i in [i0, i1]."""
        w = w_pre[j + 1] - w_pre[i0 : i1 + 1]
        s = s_pre[j + 1] - s_pre[i0 : i1 + 1]
        q = q_pre[j + 1] - q_pre[i0 : i1 + 1]
        return q - s * s / w

    prev = q_pre[1:] - s_pre[1:] * s_pre[1:] / w_pre[1:]  # one cluster spanning [0, j]
    cut_rows = []
    for m in range(2, k + 1):
        cur = np.full(d, np.inf)
        opt = np.zeros(d, dtype=np.int64)

        def solve(lo, hi, opt_lo, opt_hi):
            if lo > hi:
                return
            mid = (lo + hi) // 2
            i0 = max(opt_lo, m - 1)
            i1 = min(mid, opt_hi)
            costs = prev[i0 - 1 : i1] + sse_span(i0, i1, mid)
            rel = len(costs) - 1 - int(np.argmin(costs[::-1]))  # largest minimizer
            cur[mid] = costs[rel]
            opt[mid] = i0 + rel
            solve(lo, mid - 1, opt_lo, opt[mid])
            solve(mid + 1, hi, opt[mid], opt_hi)

        solve(m - 1, d - 1, m - 1, d - 1)
        cut_rows.append(opt)
        prev = cur

    assign = np.zeros(d, dtype=np.int64)
    j = d - 1
    for m in range(k, 1, -1):
        i = int(cut_rows[m - 2][j])
        assign[i : j + 1] = m - 1
        j = i - 1
    return assign


def filter_by_clustering(smap: SaliencyMap, k: int = 3) -> SaliencyMap:
    """Suppress every pixel outside the highest intensity cluster.

    Clusters are the exact k-means partition of the map's intensity values;
    k shrinks to the number of distinct values when there are fewer than k
    of them, so flat maps pass through unchanged.
    """
    data = smap.intensities
    values, counts = np.unique(data, return_counts=True)
    k_eff = min(k, len(values))
    if k_eff <= 1:
        return SaliencyMap(smap.width, smap.height, data.copy())
    assign = _kmeans_1d(values.astype(np.float64), counts.astype(np.float64), k_eff)
    keep_values = values[assign == assign.max()]
    mask = np.isin(data, keep_values)
    out = np.where(mask, data, 0.0)
    return SaliencyMap(smap.width, smap.height, out)


def infer_focus(
    filtered: SaliencyMap,
    frame_w: int,
    frame_h: int,
    prefilter_sum: float | None = None,
) -> FocusPoint:
    """Intensity-weighted centroid of the retained pixels, in frame space.

    prefilter_sum is the map's total intensity before filtering; when omitted
    the filtered total is used (confidence 1.0 for any non-empty map). A zero
    pre-filter mass yields the frame center with confidence 0.
    """
    data = filtered.intensities
    retained = float(data.sum())
    if prefilter_sum is None:
        prefilter_sum = retained
    if prefilter_sum <= 0.0 or retained <= 0.0:
        return FocusPoint((frame_w - 1) / 2.0, (frame_h - 1) / 2.0, 0.0)

    ys, xs = np.nonzero(data)
    weights = data[ys, xs]
    cx_map = float((xs * weights).sum() / retained)
    cy_map = float((ys * weights).sum() / retained)
    # pixel-center mapping from map resolution to frame resolution
    sx = frame_w / filtered.width
    sy = frame_h / filtered.height
    x = (cx_map + 0.5) * sx - 0.5
    y = (cy_map + 0.5) * sy - 0.5
    x = min(max(x, 0.0), frame_w - 1.0)
    y = min(max(y, 0.0), frame_h - 1.0)
    confidence = min(retained / prefilter_sum, 1.0)
    return FocusPoint(x, y, confidence)


def smooth_centers(
    points: Sequence[FocusPoint],
    starts: Iterable[int],
    alpha: float = 0.3,
    conf_floor: float = 0.05,
) -> list:
    """Exponential moving average of focus points, restarted at each segment.

    starts lists the indices where a new shot begins (0 is implied). Points
    below the confidence floor hold the running average in place instead of
    dragging it toward an unreliable measurement.
    """
    n = len(points)
    start_set = set(starts) | {0}
    smoothed = []
    sx = sy = 0.0
    for t, p in enumerate(points):
        if t in start_set:
            sx, sy = p.x, p.y
        elif p.confidence < conf_floor:
            pass  # hold previous center
        else:
            sx = alpha * p.x + (1 - alpha) * sx
            sy = alpha * p.y + (1 - alpha) * sy
        smoothed.append((sx, sy))
    assert len(smoothed) == n
    return smoothed


def _even_floor(x: float) -> int:
    return 2 * int(math.floor(x / 2.0))


def window_size(frame_w: int, frame_h: int, target: AspectRatio) -> tuple:
    """Largest even-dimensioned (w, h) of the target aspect fitting the frame."""
    if frame_w <= 0 or frame_h <= 0:
        raise ImpossibleAspect(f"empty frame {frame_w}x{frame_h}")
    if frame_w * target.den >= frame_h * target.num:
        h = _even_floor(frame_h)
        w = _even_floor(h * target.num / target.den)
    else:
        w = _even_floor(frame_w)
        h = _even_floor(w * target.den / target.num)
    if w <= 0 or h <= 0:
        raise ImpossibleAspect(
            f"aspect {target} collapses to {w}x{h} inside {frame_w}x{frame_h}"
        )
    return w, h


def window_for(center, frame_w: int, frame_h: int, target: AspectRatio) -> CropWindow:
    """Crop window of the target aspect centered as close to `center` as the
    frame bounds allow."""
    w, h = window_size(frame_w, frame_h, target)
    cx, cy = center
    x = int(math.floor(cx - w / 2.0 + 0.5))
    y = int(math.floor(cy - h / 2.0 + 0.5))
    x = min(max(x, 0), frame_w - w)
    y = min(max(y, 0), frame_h - h)
    win = CropWindow(x, y, w, h)
    win.validate(frame_w, frame_h)
    return win


def plan_windows(
    maps: Sequence[SaliencyMap],
    starts: Iterable[int],
    frame_w: int,
    frame_h: int,
    target: AspectRatio,
    k: int = 3,
    alpha: float = 0.3,
    conf_floor: float = 0.05,
) -> list:
    """Full chain: filter each map, infer focus, smooth, emit crop windows."""
    points = []
    for smap in maps:
        total = float(smap.intensities.sum())
        filtered = filter_by_clustering(smap, k=k)
        points.append(infer_focus(filtered, frame_w, frame_h, prefilter_sum=total))
    centers = smooth_centers(points, starts, alpha=alpha, conf_floor=conf_floor)
    return [window_for(c, frame_w, frame_h, target) for c in centers]


def trace_to_json(windows: Sequence[CropWindow], frame_indices: Sequence[int]) -> str:
    """Crop trace export: one {frame, x, y, w, h} record per summary frame."""
    if len(windows) != len(frame_indices):
        raise ValueError("windows and frame indices differ in length")
    records = [
        {"frame": int(f), "x": w.x, "y": w.y, "w": w.w, "h": w.h}
        for f, w in zip(frame_indices, windows)
    ]
    return json.dumps(records)


def trace_from_json(text: str) -> list:
    """Inverse of trace_to_json: list of (frame_index, CropWindow)."""
    records = json.loads(text)
    out = []
    for r in records:
        out.append((int(r["frame"]), CropWindow(int(r["x"]), int(r["y"]), int(r["w"]), int(r["h"]))))
    return out
