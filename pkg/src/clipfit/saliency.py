"""Per-frame saliency maps: import of external model output, or a built-in
spectral-residual detector as the model-free fallback."""

import os
import re
import struct
from dataclasses import dataclass, field

import numpy as np

SALM_MAGIC = b"SALM"


class ParseError(ValueError):
    """Saliency file is malformed."""


class CountMismatch(ValueError):
    """Saliency file holds a different number of maps than expected."""


@dataclass(frozen=True)
class SaliencyMap:
    """Row-major grid of attention intensities in [0, 1].

    Map resolution is independent of the frame; consumers rescale coordinates.
    """

    width: int
    height: int
    intensities: np.ndarray = field(compare=False)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("saliency map dimensions must be positive")
        data = np.asarray(self.intensities, dtype=np.float64)
        if data.shape != (self.height, self.width):
            data = data.reshape(self.height, self.width)
        if float(data.min(initial=0.0)) < 0.0 or float(data.max(initial=0.0)) > 1.0:
            raise ValueError("saliency intensities must lie in [0, 1]")
        object.__setattr__(self, "intensities", data)


def import_saliency(path: str, expected_frames: int) -> list:
    """Load one saliency map per expected frame.

    Accepts the SALM binary container or a directory of numbered grayscale
    PNG files. Byte intensities map to [0, 1] by division with 255.
    """
    if os.path.isdir(path):
        maps = _load_png_dir(path)
    else:
        maps = _load_salm(path)
    if len(maps) != expected_frames:
        raise CountMismatch(f"expected {expected_frames} saliency maps, found {len(maps)}")
    return maps


def _load_salm(path: str) -> list:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16 or header[:4] != SALM_MAGIC:
            raise ParseError(f"{path}: not a SALM file")
        count, width, height = struct.unpack("<III", header[4:16])
        if width == 0 or height == 0:
            raise ParseError(f"{path}: zero map dimensions")
        payload = fh.read()
    expected_bytes = count * width * height
    if len(payload) != expected_bytes:
        raise ParseError(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected_bytes}"
        )
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(count, height, width)
    return [SaliencyMap(width, height, frame.astype(np.float64) / 255.0) for frame in raw]


def _load_png_dir(path: str) -> list:
    from PIL import Image

    names = [n for n in os.listdir(path) if n.lower().endswith(".png")]
    if not names:
        raise ParseError(f"{path}: no PNG files")

    def sort_key(name):
        m = re.search(r"(\d+)", name)
        if not m:
            raise ParseError(f"{path}/{name}: file name carries no frame number")
        return int(m.group(1))

    maps = []
    for name in sorted(names, key=sort_key):
        img = Image.open(os.path.join(path, name)).convert("L")
        arr = np.asarray(img, dtype=np.float64) / 255.0
        maps.append(SaliencyMap(img.width, img.height, arr))
    return maps


def _to_gray(pixels: np.ndarray) -> np.ndarray:
    """BT.601 luma from an (h, w, 3) uint8 RGB grid."""
    p = pixels.astype(np.float64)
    return 0.299 * p[:, :, 0] + 0.587 * p[:, :, 1] + 0.114 * p[:, :, 2]


def _resample_area(gray: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Block-mean downscale (nearest-style replication when upscaling)."""
    src_h, src_w = gray.shape
    ys = (np.arange(out_h + 1) * src_h) // out_h
    xs = (np.arange(out_w + 1) * src_w) // out_w
    out = np.empty((out_h, out_w), dtype=np.float64)
    for i in range(out_h):
        y0, y1 = ys[i], max(ys[i + 1], ys[i] + 1)
        for j in range(out_w):
            x0, x1 = xs[j], max(xs[j + 1], xs[j] + 1)
            out[i, j] = gray[y0:y1, x0:x1].mean()
    return out


def _box3(img: np.ndarray) -> np.ndarray:
    padded = np.pad(img, 1, mode="edge")
    out = np.zeros_like(img)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            out += padded[dy : dy + img.shape[0], dx : dx + img.shape[1]]
    return out / 9.0


BLUR_SIGMA = 5.0


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(3 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2 * sigma * sigma))
    return k / k.sum()


def _blur(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable convolution with edge-replicate padding."""
    r = len(kernel) // 2
    padded = np.pad(img, ((r, r), (0, 0)), mode="edge")
    v = sum(kernel[i] * padded[i : i + img.shape[0]] for i in range(len(kernel)))
    padded = np.pad(v, ((0, 0), (r, r)), mode="edge")
    return sum(kernel[i] * padded[:, i : i + img.shape[1]] for i in range(len(kernel)))


def spectral_residual(pixels: np.ndarray, map_w: int = 64, map_h: int = 64) -> SaliencyMap:
    """Spectral-residual saliency of one RGB frame at map resolution.

    The residual of the log amplitude spectrum against its local average
    highlights the statistically unexpected parts of the image; back in the
    spatial domain those are the attention candidates. log1p keeps exact
    spectral zeros of synthetic content from poisoning the local average.
    """
    gray = _to_gray(np.asarray(pixels))
    small = _resample_area(gray, map_w, map_h)
    if float(small.max()) - float(small.min()) <= 0.0:
        return SaliencyMap(map_w, map_h, np.zeros((map_h, map_w)))
    spectrum = np.fft.fft2(small)
    amplitude = np.abs(spectrum)
    phase = np.angle(spectrum)
    log_amp = np.log1p(amplitude)
    residual = log_amp - _box3(log_amp)
    recomposed = np.exp(residual + 1j * phase)
    sal = np.abs(np.fft.ifft2(recomposed)) ** 2
    sal = _blur(sal, gaussian_kernel(BLUR_SIGMA))
    lo, hi = float(sal.min()), float(sal.max())
    if hi - lo <= 0.0:
        norm = np.zeros_like(sal)
    else:
        norm = (sal - lo) / (hi - lo)
    return SaliencyMap(map_w, map_h, norm)
