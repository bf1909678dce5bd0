"""Key-fragment selection: exact 0/1 knapsack over shots.

Shot value is the sum of its frame scores, weight its length in frames, and
the budget the target duration converted to frames. Among equal-value optima
the lexicographically smallest shot-index set wins, so results are
reproducible.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .scoring import ImportanceSeries
from .shots import Shot


@dataclass(frozen=True)
class FragmentSelection:
    selected: tuple
    total_frames: int
    total_value: float

    def __post_init__(self):
        sel = tuple(int(i) for i in self.selected)
        if list(sel) != sorted(set(sel)):
            raise ValueError("selected shot indices must be unique and ascending")
        object.__setattr__(self, "selected", sel)


def budget_frames(target_duration_sec: float, frame_rate: Fraction) -> int:
    """Duration cap in whole frames: floor(duration * fps)."""
    return int(math.floor(Fraction(target_duration_sec) * frame_rate))


def aggregate_shot_values(series: ImportanceSeries, shots: Sequence[Shot]) -> list:
    """(value, weight) per shot: summed frame scores and length in frames."""
    scores = series.scores
    if shots and shots[-1].end_frame >= len(scores):
        raise ValueError(
            f"scores cover {len(scores)} frames, shots end at {shots[-1].end_frame}"
        )
    return [
        (float(scores[s.start_frame : s.end_frame + 1].sum()), s.length) for s in shots
    ]


def select_fragments(values_weights: Sequence[tuple], budget: int) -> FragmentSelection:
    """Maximize total value subject to total weight <= budget (exact DP).

    A budget covering every shot selects everything, so an over-long budget
    degrades into an honest copy of the source.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    n = len(values_weights)
    values = [float(v) for v, _ in values_weights]
    weights = [int(w) for _, w in values_weights]
    if any(w <= 0 for w in weights):
        raise ValueError("shot weights must be positive")
    total_weight = sum(weights)
    if budget >= total_weight:
        return FragmentSelection(tuple(range(n)), total_weight, float(sum(values)))

    cap = min(budget, total_weight)
    # suffix[i][b]: best value from shots i.. with capacity b
    suffix = np.zeros((n + 1, cap + 1), dtype=np.float64)
    for i in range(n - 1, -1, -1):
        w, v = weights[i], values[i]
        suffix[i] = suffix[i + 1]
        if w <= cap:
            take = suffix[i + 1, : cap - w + 1] + v
            suffix[i, w:] = np.maximum(suffix[i + 1, w:], take)

    selected = []
    b = cap
    total_frames = 0
    for i in range(n):
        if suffix[i, b] <= 0.0:
            break  # empty completion is optimal and lexicographically smallest
        w, v = weights[i], values[i]
        if w <= b and v + suffix[i + 1, b - w] == suffix[i, b]:
            selected.append(i)
            total_frames += w
            b -= w
    total_value = float(sum(values[i] for i in selected))
    return FragmentSelection(tuple(selected), total_frames, total_value)


def assemble(selection: FragmentSelection, shots: Sequence[Shot]) -> list:
    """Fragments of the selected shots in chronological order, never merged."""
    for i in selection.selected:
        if i < 0 or i >= len(shots):
            raise ValueError(f"selected shot index {i} out of range")
    return [(shots[i].start_frame, shots[i].end_frame) for i in selection.selected]
