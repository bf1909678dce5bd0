"""Shared helpers: synthetic clips, the RVID raw container, watermarks."""

import numpy as np
import pytest

import acceptance_report


def pytest_terminal_summary(terminalreporter):
    if acceptance_report.lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_report.lines:
            terminalreporter.write_line(f"PASS - {line}")

from clipfit.media import TranscoderConfig
from clipfit.transcoder_tool import write_rvid

from fractions import Fraction


def solid_frame(width, height, rgb):
    frame = np.empty((height, width, 3), dtype=np.uint8)
    frame[:, :] = rgb
    return frame


def gradient_frame(width, height, phase=0):
    """Deterministic moving pattern with hard edges (for exact-pixel checks)."""
    x = np.linspace(0, 255, width, dtype=np.float64)
    y = np.linspace(0, 255, height, dtype=np.float64)
    base = (x[None, :] + y[:, None] + phase) % 256
    frame = np.stack([base, (base + 85) % 256, (base + 170) % 256], axis=-1)
    return frame.astype(np.uint8)


def smooth_frame(width, height, phase=0.0):
    """Band-limited sinusoidal content; survives lossy encoding well."""
    x = np.linspace(0, 2 * np.pi, width)
    y = np.linspace(0, 2 * np.pi, height)
    base = 127.5 + 60 * np.sin(x[None, :] + phase * 0.07) + 50 * np.cos(y[:, None] - phase * 0.05)
    r = np.clip(base, 0, 255)
    g = np.clip(base * 0.8 + 20, 0, 255)
    b = np.clip(255 - base * 0.9, 0, 255)
    return np.stack([r, g, b], axis=-1).astype(np.uint8)


WM_BITS = 16
WM_BLOCK = 8


def watermark_frame(width, height, index, background=64):
    """Frame index encoded as 16 big black/white blocks along the top row."""
    frame = solid_frame(width, height, (background, background, background))
    for bit in range(WM_BITS):
        value = 255 if (index >> bit) & 1 else 0
        x0 = bit * WM_BLOCK
        frame[0:WM_BLOCK, x0 : x0 + WM_BLOCK] = value
    return frame


def read_watermark(frame):
    index = 0
    for bit in range(WM_BITS):
        x0 = bit * WM_BLOCK
        block = frame[0:WM_BLOCK, x0 : x0 + WM_BLOCK].astype(np.float64)
        if block.size and block.mean() > 127:
            index |= 1 << bit
    return index


def make_clip(path, frames, fps=Fraction(25)):
    frames = list(frames)
    h, w = frames[0].shape[:2]
    write_rvid(str(path), frames, w, h, fps)
    return str(path)


def psnr(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return float("inf")
    return 10.0 * np.log10(255.0**2 / mse)


@pytest.fixture
def transcoder(tmp_path):
    return TranscoderConfig.reference(work_dir=str(tmp_path / "tw"))


@pytest.fixture
def two_scene_clip(tmp_path):
    """100 dark frames then 100 bright frames, 160x120 @ 25 fps."""
    frames = [solid_frame(160, 120, (10, 10, 10)) for _ in range(100)]
    frames += [solid_frame(160, 120, (240, 240, 240)) for _ in range(100)]
    return make_clip(tmp_path / "two_scene.rvid", frames)
