"""Video probe/decode/render through a configurable external transcoder.

The transcoder is one executable plus three invocation templates (probe,
decode-to-raw-frames, encode-from-filter-script); codecs stay outside this
package. Frames cross the process boundary as packed RGB24, row-major, no
padding. The bundled reference tool (clipfit.transcoder_tool) implements the
contract, and any compliant tool can be configured in its place.
"""

import json
import os
import shlex
import subprocess
import sys
import tempfile
import urllib.parse
import uuid
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .cropping import CropWindow


class SourceUnreachable(RuntimeError):
    """Source file or URL cannot be read."""


class UnsupportedSource(ValueError):
    """Source scheme is not plain HTTP(S) or a local path."""


class NotAVideo(RuntimeError):
    """The transcoder could not parse the source as video."""


class ZeroFrames(RuntimeError):
    """The source parses but holds no frames."""


class DecodeFailure(RuntimeError):
    def __init__(self, index: int, detail: str = ""):
        super().__init__(f"decode failed at frame {index}" + (f": {detail}" if detail else ""))
        self.index = index


class TranscoderFailure(RuntimeError):
    def __init__(self, exit_code: int, stderr: str):
        super().__init__(f"transcoder exited {exit_code}: {stderr.strip()[:2000]}")
        self.exit_code = exit_code
        self.stderr = stderr


class EmptySelection(ValueError):
    """Nothing selected to render."""


@dataclass
class TranscoderConfig:
    """Executable path plus the three invocation templates.

    Templates are tokenized first and then each token is formatted, so paths
    with spaces survive. Available placeholders: {input}, {output}, {script}.
    """

    exe: str
    probe_template: str
    decode_template: str
    encode_template: str
    work_dir: str = ""
    fetch_timeout_sec: float = 30.0

    @classmethod
    def reference(cls, work_dir: str = "") -> "TranscoderConfig":
        """Configuration for the bundled reference transcoder tool."""
        return cls(
            exe=sys.executable,
            probe_template="-m clipfit.transcoder_tool probe {input}",
            decode_template="-m clipfit.transcoder_tool decode {input}",
            encode_template="-m clipfit.transcoder_tool encode {input} {script} {output}",
            work_dir=work_dir,
        )

    def argv(self, template: str, **params) -> list:
        return [self.exe] + [tok.format(**params) for tok in shlex.split(template)]


@dataclass(frozen=True)
class VideoAsset:
    id: str
    source: str
    width: int
    height: int
    frame_rate: Fraction
    frame_count: int
    duration: float
    path: str = ""  # local file handed to the transcoder; defaults to source

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"bad dimensions {self.width}x{self.height}")
        if self.frame_count <= 0:
            raise ValueError("frame_count must be positive")
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be positive")
        if abs(self.duration - self.frame_count / float(self.frame_rate)) > 1.0 / float(
            self.frame_rate
        ):
            raise ValueError("duration disagrees with frame_count / frame_rate")
        if not self.path:
            object.__setattr__(self, "path", self.source)


@dataclass(frozen=True)
class Frame:
    index: int
    pixels: np.ndarray = field(compare=False)  # (h, w, 3) uint8 RGB


@dataclass
class OutputSpec:
    """Where and how to encode the summary; omitted fields follow the source."""

    path: str
    width: int | None = None
    height: int | None = None
    fps: Fraction | None = None


def _parse_fps(value) -> Fraction:
    if isinstance(value, str) and "/" in value:
        num, den = value.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(value).limit_denominator(100000)


def probe(source: str, config: TranscoderConfig) -> VideoAsset:
    """Read container metadata for a local video file."""
    if not os.path.isfile(source):
        raise SourceUnreachable(f"{source}: no such file")
    argv = config.argv(config.probe_template, input=source)
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        raise NotAVideo(f"{source}: {proc.stderr.strip()[:500]}")
    try:
        meta = json.loads(proc.stdout)
        width = int(meta["width"])
        height = int(meta["height"])
        frame_count = int(meta["frame_count"])
        fps = _parse_fps(meta["fps"])
    except (json.JSONDecodeError, KeyError, ValueError, ZeroDivisionError) as exc:
        raise NotAVideo(f"{source}: unusable probe output ({exc})") from exc
    if frame_count == 0:
        raise ZeroFrames(f"{source}: video holds no frames")
    return VideoAsset(
        id=uuid.uuid4().hex,
        source=source,
        width=width,
        height=height,
        frame_rate=fps,
        frame_count=frame_count,
        duration=frame_count / float(fps),
        path=source,
    )


def _read_exact(stream, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining > 0:
        chunk = stream.read(remaining)
        if not chunk:
            break
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def decode_frames(asset: VideoAsset, config: TranscoderConfig, stride: int = 1) -> Iterator[Frame]:
    """Stream frames 0, stride, 2*stride, ... as RGB24 numpy grids.

    The whole video is never buffered; one subprocess per decode, one consumer
    per stream.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    argv = config.argv(config.decode_template, input=asset.path)
    frame_bytes = asset.width * asset.height * 3
    stderr_file = tempfile.TemporaryFile()
    proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=stderr_file)
    index = 0
    try:
        while True:
            data = _read_exact(proc.stdout, frame_bytes)
            if not data:
                break
            if len(data) != frame_bytes:
                raise DecodeFailure(index, "truncated frame on pipe")
            if index % stride == 0:
                pixels = np.frombuffer(data, dtype=np.uint8).reshape(
                    asset.height, asset.width, 3
                )
                yield Frame(index, pixels)
            index += 1
        proc.wait()
        if proc.returncode != 0:
            stderr_file.seek(0)
            raise DecodeFailure(index, stderr_file.read().decode(errors="replace")[:500])
        if index != asset.frame_count:
            raise DecodeFailure(index, f"stream ended at {index}/{asset.frame_count} frames")
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait()
        proc.stdout.close()
        stderr_file.close()


def _even(x: int) -> int:
    return x - (x % 2)


def validate_fragments(fragments: Sequence[tuple], frame_count: int) -> None:
    prev_end = -1
    for start, end in fragments:
        if start > end:
            raise ValueError(f"fragment ({start}, {end}) reversed")
        if start <= prev_end:
            raise ValueError("fragments overlap or are out of order")
        if end >= frame_count:
            raise ValueError(f"fragment ({start}, {end}) exceeds {frame_count} frames")
        prev_end = end


def render_summary(
    asset: VideoAsset,
    fragments: Sequence[tuple],
    crops: Sequence[CropWindow],
    output_spec: OutputSpec,
    config: TranscoderConfig,
) -> str:
    """Encode the selected fragments, each frame cropped to its window.

    Fragments concatenate chronologically; every crop shares one (w, h) so
    the output geometry is constant. Output dimensions are even and never
    exceed the crop window (no upscaling).
    """
    if not fragments:
        raise EmptySelection("no fragments selected")
    validate_fragments(fragments, asset.frame_count)
    total = sum(e - s + 1 for s, e in fragments)
    if len(crops) != total:
        raise ValueError(f"{len(crops)} crops for {total} summary frames")
    first = crops[0]
    for c in crops:
        if (c.w, c.h) != (first.w, first.h):
            raise ValueError("crop windows must share one size")
        c.validate(asset.width, asset.height)

    out_w = _even(min(output_spec.width or first.w, first.w))
    out_h = _even(min(output_spec.height or first.h, first.h))
    if out_w <= 0 or out_h <= 0:
        raise ValueError("output dimensions collapse to zero")
    fps = output_spec.fps or asset.frame_rate

    script = {
        "version": 1,
        "fps": [fps.numerator, fps.denominator],
        "output": {"width": out_w, "height": out_h},
        "fragments": [[int(s), int(e)] for s, e in fragments],
        "crops": [[c.x, c.y, c.w, c.h] for c in crops],
    }
    work_dir = config.work_dir or tempfile.gettempdir()
    os.makedirs(work_dir, exist_ok=True)
    fd, script_path = tempfile.mkstemp(suffix=".json", prefix="filter-", dir=work_dir)
    with os.fdopen(fd, "w") as fh:
        json.dump(script, fh)

    argv = config.argv(
        config.encode_template,
        input=asset.path,
        script=script_path,
        output=output_spec.path,
    )
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        raise TranscoderFailure(proc.returncode, proc.stderr)
    return output_spec.path


def fetch(url: str, dest: str, timeout: float = 30.0) -> str:
    """Download a plain HTTP(S) file URL to a local path."""
    import requests

    scheme = urllib.parse.urlparse(url).scheme.lower()
    if scheme not in ("http", "https"):
        raise UnsupportedSource(f"unsupported source scheme {scheme!r}")
    try:
        with requests.get(url, stream=True, timeout=timeout) as resp:
            resp.raise_for_status()
            with open(dest, "wb") as fh:
                for chunk in resp.iter_content(chunk_size=1 << 16):
                    fh.write(chunk)
    except requests.RequestException as exc:
        raise SourceUnreachable(f"{url}: {exc}") from exc
    return dest
