"""Platform presets and summary specifications.

A preset pairs one platform's duration cap with its display aspect ratio;
custom specs carry user-chosen values.
"""

import json
from dataclasses import dataclass

from .cropping import AspectRatio


class UnknownPreset(KeyError):
    pass


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class PlatformPreset:
    id: str
    label: str
    max_duration: float  # seconds
    aspect: AspectRatio

    def __post_init__(self):
        if self.max_duration <= 0:
            raise ValueError("preset duration must be positive")


@dataclass(frozen=True)
class SummarySpec:
    target_duration: float  # seconds
    aspect: AspectRatio
    origin: str = "custom"  # preset id or "custom"

    def __post_init__(self):
        if self.target_duration <= 0:
            raise InvalidSpec("target duration must be positive")


BUILTIN_PRESETS = (
    PlatformPreset("facebook-feed", "Facebook feed", 120.0, AspectRatio(16, 9)),
    PlatformPreset("instagram-story", "Instagram story", 20.0, AspectRatio(9, 16)),
    PlatformPreset("facebook-story", "Facebook story", 20.0, AspectRatio(9, 16)),
)


def load_presets(path: str | None = None) -> dict:
    """Built-in presets, optionally extended/overridden from a JSON file.

    File schema: [{"id", "label", "max_duration_sec", "aspect": "W:H"}, ...].
    """
    presets = {p.id: p for p in BUILTIN_PRESETS}
    if path:
        with open(path) as fh:
            for entry in json.load(fh):
                preset = PlatformPreset(
                    entry["id"],
                    entry.get("label", entry["id"]),
                    float(entry["max_duration_sec"]),
                    AspectRatio.parse(entry["aspect"]),
                )
                presets[preset.id] = preset
    return presets


def spec_from_preset(preset_id: str, presets: dict | None = None) -> SummarySpec:
    presets = presets if presets is not None else {p.id: p for p in BUILTIN_PRESETS}
    if preset_id not in presets:
        raise UnknownPreset(preset_id)
    p = presets[preset_id]
    return SummarySpec(p.max_duration, p.aspect, origin=p.id)


def spec_from_custom(duration_sec, aspect: str) -> SummarySpec:
    try:
        duration = float(duration_sec)
    except (TypeError, ValueError):
        raise InvalidSpec(f"duration {duration_sec!r} is not a number") from None
    try:
        ratio = AspectRatio.parse(str(aspect))
    except ValueError as exc:
        raise InvalidSpec(str(exc)) from exc
    return SummarySpec(duration, ratio, origin="custom")
