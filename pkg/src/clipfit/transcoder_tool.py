"""Reference transcoder implementing the probe/decode/encode contract.

Usage (normally configured as the transcoder executable, not run by hand):

    python -m clipfit.transcoder_tool probe  <input>
    python -m clipfit.transcoder_tool decode <input>
    python -m clipfit.transcoder_tool encode <input> <script> <output>

Two container families are supported: the lossless RVID raw container
(magic + little-endian u32 width, height, fps_num, fps_den, frame_count,
then packed RGB24 frames) and, through OpenCV, common codec containers such
as MP4. `probe` prints JSON metadata; `decode` streams packed RGB24 to
stdout; `encode` applies a JSON filter script (fragment list, per-frame
crops, output size, fps) to produce the summary file.
"""

import argparse
import json
import struct
import sys
from fractions import Fraction

import numpy as np

RVID_MAGIC = b"RVID"
RVID_HEADER = struct.Struct("<IIIII")


def _fail(message: str, code: int = 1):
    print(message, file=sys.stderr)
    sys.exit(code)


def _is_rvid(path: str) -> bool:
    return path.lower().endswith(".rvid")


def read_rvid_header(fh):
    magic = fh.read(4)
    if magic != RVID_MAGIC:
        raise ValueError("not an RVID file")
    data = fh.read(RVID_HEADER.size)
    if len(data) != RVID_HEADER.size:
        raise ValueError("truncated RVID header")
    width, height, fps_num, fps_den, frame_count = RVID_HEADER.unpack(data)
    if width == 0 or height == 0 or fps_num == 0 or fps_den == 0:
        raise ValueError("bad RVID header fields")
    return width, height, Fraction(fps_num, fps_den), frame_count


def write_rvid(path: str, frames, width: int, height: int, fps: Fraction):
    frames = list(frames)
    with open(path, "wb") as fh:
        fh.write(RVID_MAGIC)
        fh.write(
            RVID_HEADER.pack(width, height, fps.numerator, fps.denominator, len(frames))
        )
        for frame in frames:
            fh.write(np.ascontiguousarray(frame, dtype=np.uint8).tobytes())


def _iter_rvid_frames(path: str):
    with open(path, "rb") as fh:
        width, height, _, frame_count = read_rvid_header(fh)
        size = width * height * 3
        for i in range(frame_count):
            data = fh.read(size)
            if len(data) != size:
                raise ValueError(f"truncated RVID payload at frame {i}")
            yield np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3)


def _cv2():
    import cv2

    return cv2


def _iter_cv_frames(path: str):
    cv2 = _cv2()
    cap = cv2.VideoCapture(path)
    if not cap.isOpened():
        raise ValueError(f"cannot open {path}")
    try:
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            yield cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)
    finally:
        cap.release()


def iter_frames(path: str):
    return _iter_rvid_frames(path) if _is_rvid(path) else _iter_cv_frames(path)


def probe_file(path: str) -> dict:
    if _is_rvid(path):
        with open(path, "rb") as fh:
            width, height, fps, frame_count = read_rvid_header(fh)
        return {
            "width": width,
            "height": height,
            "fps": f"{fps.numerator}/{fps.denominator}",
            "frame_count": frame_count,
        }
    cv2 = _cv2()
    cap = cv2.VideoCapture(path)
    if not cap.isOpened():
        raise ValueError(f"cannot open {path} as video")
    try:
        width = int(cap.get(cv2.CAP_PROP_FRAME_WIDTH))
        height = int(cap.get(cv2.CAP_PROP_FRAME_HEIGHT))
        fps_raw = float(cap.get(cv2.CAP_PROP_FPS))
        frame_count = int(cap.get(cv2.CAP_PROP_FRAME_COUNT))
    finally:
        cap.release()
    if width <= 0 or height <= 0:
        raise ValueError(f"{path}: no video stream")
    if frame_count < 0:
        frame_count = sum(1 for _ in _iter_cv_frames(path))
    fps = Fraction(str(round(fps_raw, 6))).limit_denominator(100000) if fps_raw > 0 else Fraction(25)
    return {
        "width": width,
        "height": height,
        "fps": f"{fps.numerator}/{fps.denominator}",
        "frame_count": frame_count,
    }


class _CvWriter:
    FOURCC = {".avi": "MJPG"}

    def __init__(self, path: str, width: int, height: int, fps: Fraction):
        cv2 = _cv2()
        import os

        ext = os.path.splitext(path)[1].lower()
        fourcc = cv2.VideoWriter_fourcc(*self.FOURCC.get(ext, "mp4v"))
        self._cv2 = cv2
        self._writer = cv2.VideoWriter(path, fourcc, float(fps), (width, height))
        if not self._writer.isOpened():
            raise ValueError(f"cannot open {path} for writing")

    def write(self, rgb: np.ndarray):
        self._writer.write(self._cv2.cvtColor(rgb, self._cv2.COLOR_RGB2BGR))

    def close(self):
        self._writer.release()


class _RvidWriter:
    def __init__(self, path: str, width: int, height: int, fps: Fraction):
        self._fh = open(path, "wb")
        self._path = path
        self._meta = (width, height, fps)
        self._count = 0
        self._fh.write(RVID_MAGIC)
        self._fh.write(RVID_HEADER.pack(width, height, fps.numerator, fps.denominator, 0))

    def write(self, rgb: np.ndarray):
        self._fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())
        self._count += 1

    def close(self):
        width, height, fps = self._meta
        self._fh.seek(4)
        self._fh.write(
            RVID_HEADER.pack(width, height, fps.numerator, fps.denominator, self._count)
        )
        self._fh.close()


def _open_writer(path: str, width: int, height: int, fps: Fraction):
    if _is_rvid(path):
        return _RvidWriter(path, width, height, fps)
    return _CvWriter(path, width, height, fps)


def _resize(rgb: np.ndarray, width: int, height: int) -> np.ndarray:
    if rgb.shape[1] == width and rgb.shape[0] == height:
        return rgb
    cv2 = _cv2()
    interp = cv2.INTER_AREA if width <= rgb.shape[1] else cv2.INTER_LINEAR
    return cv2.resize(rgb, (width, height), interpolation=interp)


def encode_file(input_path: str, script_path: str, output_path: str):
    with open(script_path) as fh:
        script = json.load(fh)
    fps = Fraction(script["fps"][0], script["fps"][1])
    out_w = int(script["output"]["width"])
    out_h = int(script["output"]["height"])
    fragments = [(int(s), int(e)) for s, e in script["fragments"]]
    crops = script.get("crops")

    spans = sorted(fragments)
    writer = _open_writer(output_path, out_w, out_h, fps)
    written = 0
    try:
        span_i = 0
        for index, frame in enumerate(iter_frames(input_path)):
            while span_i < len(spans) and index > spans[span_i][1]:
                span_i += 1
            if span_i >= len(spans):
                break
            start, end = spans[span_i]
            if index < start:
                continue
            if crops is not None:
                x, y, w, h = crops[written]
                frame = frame[y : y + h, x : x + w]
            writer.write(_resize(frame, out_w, out_h))
            written += 1
    finally:
        writer.close()
    expected = sum(e - s + 1 for s, e in fragments)
    if written != expected:
        raise ValueError(f"wrote {written} frames, script selects {expected}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="clipfit-transcoder", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_probe = sub.add_parser("probe")
    p_probe.add_argument("input")
    p_decode = sub.add_parser("decode")
    p_decode.add_argument("input")
    p_encode = sub.add_parser("encode")
    p_encode.add_argument("input")
    p_encode.add_argument("script")
    p_encode.add_argument("output")
    args = parser.parse_args(argv)

    try:
        if args.command == "probe":
            print(json.dumps(probe_file(args.input)))
        elif args.command == "decode":
            out = sys.stdout.buffer
            for frame in iter_frames(args.input):
                out.write(np.ascontiguousarray(frame, dtype=np.uint8).tobytes())
            out.flush()
        elif args.command == "encode":
            encode_file(args.input, args.script, args.output)
    except (OSError, ValueError, KeyError) as exc:
        _fail(str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
