"""Service configuration from a plain-text key = value file."""

import os
import sys
from dataclasses import dataclass, field

from .media import TranscoderConfig


@dataclass
class ServiceConfig:
    listen_addr: str = "127.0.0.1:8080"
    data_dir: str = "data"
    workers: int = 2
    ttl_hours: float = 24.0
    max_upload_bytes: int = 2 * 1024**3
    fetch_timeout_sec: float = 30.0
    transcoder_path: str = field(default_factory=lambda: sys.executable)
    probe_template: str = "-m clipfit.transcoder_tool probe {input}"
    decode_template: str = "-m clipfit.transcoder_tool decode {input}"
    encode_template: str = "-m clipfit.transcoder_tool encode {input} {script} {output}"
    output_container: str = "mp4"
    static_dir: str = ""
    presets_file: str = ""

    @property
    def work_dir(self) -> str:
        return os.path.join(self.data_dir, "work")

    @property
    def jobs_dir(self) -> str:
        return os.path.join(self.data_dir, "jobs")

    def transcoder(self) -> TranscoderConfig:
        return TranscoderConfig(
            exe=self.transcoder_path,
            probe_template=self.probe_template,
            decode_template=self.decode_template,
            encode_template=self.encode_template,
            work_dir=self.work_dir,
            fetch_timeout_sec=self.fetch_timeout_sec,
        )

    def host_port(self) -> tuple:
        host, _, port = self.listen_addr.rpartition(":")
        return host or "127.0.0.1", int(port)


_INT_KEYS = {"workers", "max_upload_bytes"}
_FLOAT_KEYS = {"ttl_hours", "fetch_timeout_sec"}


def load_config(path: str | None = None) -> ServiceConfig:
    """Parse `key = value` lines; '#' starts a comment, unknown keys fail."""
    cfg = ServiceConfig()
    if not path:
        return cfg
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if not hasattr(cfg, key) or key in ("work_dir", "jobs_dir"):
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            if key in _INT_KEYS:
                setattr(cfg, key, int(value))
            elif key in _FLOAT_KEYS:
                setattr(cfg, key, float(value))
            else:
                setattr(cfg, key, value)
    return cfg
