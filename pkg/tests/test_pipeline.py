"""End-to-end pipeline runs outside the HTTP layer."""

import json
import os

import numpy as np
import pytest

from clipfit.config import ServiceConfig
from clipfit.jobs import JobStore, SummaryJob
from clipfit.media import probe
from clipfit.pipeline import run_pipeline, summarize_file
from clipfit.presets import spec_from_custom

from conftest import make_clip, read_watermark, solid_frame, watermark_frame



def four_shot_frames(width=320, height=192, shot_len=125):
    """20 s at 25 fps: four visually distinct scenes with mild motion.

    192 = 16 * 12, so the 9:16 crop window (108x192) has the exact target
    aspect with even dimensions.
    """
    frames = []
    grays = (30, 200, 90, 150)
    for s, gray in enumerate(grays):
        for i in range(shot_len):
            frame = solid_frame(width, height, (gray, gray, gray))
            # a drifting bright block provides motion and a saliency target
            x = (10 + s * 40 + i // 4) % (width - 24)
            y = (20 + s * 25) % (height - 24)
            frame[y : y + 24, x : x + 24] = 255 if gray < 128 else 0
            frames.append(frame)
    return frames


@pytest.fixture
def service_config(tmp_path):
    return ServiceConfig(data_dir=str(tmp_path / "data"))


def new_store(config):
    return JobStore(config.jobs_dir)


def make_job(source, duration=5.0, aspect="9:16", sidecars=None):
    spec = spec_from_custom(duration, aspect)
    return SummaryJob.new(
        source,
        {
            "target_duration": spec.target_duration,
            "aspect": str(spec.aspect),
            "origin": spec.origin,
        },
        sidecars=sidecars or {},
    )


class TestRunPipeline:
    def test_full_run_on_four_shot_clip(self, tmp_path, service_config):
        src = make_clip(tmp_path / "four.rvid", four_shot_frames())
        store = new_store(service_config)
        job = make_job(src, duration=5.0, aspect="9:16")
        store.save(job)
        done = run_pipeline(job, store, service_config)
        assert done.state == "done", done.error
        assert done.progress == 1.0
        result = done.result
        # duration cap: <= 5 s + 1 frame
        out = probe(result["output_path"], service_config.transcoder())
        assert out.frame_count <= 125
        assert out.duration <= 5.0 + 1 / 25
        # even dims at exactly 9:16
        assert out.width % 2 == 0 and out.height % 2 == 0
        assert out.width * 16 == out.height * 9
        # crop trace aligned with summary frames
        assert len(result["crop_trace"]) == result["summary_frames"] == out.frame_count
        # fragments chronological and disjoint
        flat = [f for frag in result["fragments"] for f in frag]
        assert flat == sorted(flat)

    def test_budget_exceeding_video_keeps_everything(self, tmp_path, service_config):
        frames = four_shot_frames(shot_len=30)  # 120 frames, 4.8 s
        src = make_clip(tmp_path / "short.rvid", frames)
        store = new_store(service_config)
        job = make_job(src, duration=20.0, aspect="9:16")
        store.save(job)
        done = run_pipeline(job, store, service_config)
        assert done.state == "done", done.error
        assert done.result["summary_frames"] == 120

    def test_unreachable_url_fails_at_fetching(self, service_config):
        store = new_store(service_config)
        job = make_job("http://127.0.0.1:1/clip.rvid")
        store.save(job)
        done = run_pipeline(job, store, service_config)
        assert done.state == "failed"
        assert done.error.startswith("fetching:")

    def test_not_a_video_fails_at_probing(self, tmp_path, service_config):
        bad = tmp_path / "bad.rvid"
        bad.write_bytes(b"junk")
        store = new_store(service_config)
        job = make_job(str(bad))
        store.save(job)
        done = run_pipeline(job, store, service_config)
        assert done.state == "failed"
        assert done.error.startswith("probing:")

    def test_sidecars_drive_selection(self, tmp_path, service_config):
        frames = [watermark_frame(320, 180, i) for i in range(100)]
        src = make_clip(tmp_path / "wm.rvid", frames)
        shots_path = tmp_path / "shots.json"
        shots_path.write_text(json.dumps([[0, 49], [50, 99]]))
        # second shot carries all the importance
        scores = [0.0] * 50 + [1.0] * 50
        scores_path = tmp_path / "scores.json"
        scores_path.write_text(json.dumps(scores))
        # saliency pinned to the left edge so the crop hugs x=0
        maps = [np.zeros((64, 64), np.uint8) for _ in range(50)]
        for m in maps:
            m[28:36, 2:6] = 255
        sal_path = tmp_path / "maps.salm"
        with open(sal_path, "wb") as fh:
            import struct

            fh.write(b"SALM" + struct.pack("<III", 50, 64, 64))
            for m in maps:
                fh.write(m.tobytes())

        store = new_store(service_config)
        job = make_job(
            src,
            duration=2.0,
            aspect="9:16",
            sidecars={
                "shots": str(shots_path),
                "scores": str(scores_path),
                "saliency": str(sal_path),
            },
        )
        store.save(job)
        done = run_pipeline(job, store, service_config)
        assert done.state == "done", done.error
        assert done.result["fragments"] == [[50, 99]]
        # crop window pinned to the left of the 320x180 frame (w=100 for 9:16)
        assert all(rec["x"] == 0 for rec in done.result["crop_trace"])
        # frames in the rendered output come from the selected shot
        tc = service_config.transcoder()
        from clipfit.media import decode_frames

        out_asset = probe(done.result["output_path"], tc)
        # crop breaks the top-row watermark alignment only if x > 0; x=0 keeps it
        marks = [read_watermark(f.pixels) for f in decode_frames(out_asset, tc)]
        assert marks == list(range(50, 100))

    def test_progress_monotone_and_states_ordered(self, tmp_path, service_config):
        from clipfit.jobs import STATES

        src = make_clip(tmp_path / "m.rvid", four_shot_frames(shot_len=25))
        store = new_store(service_config)
        job = make_job(src, duration=2.0)
        store.save(job)
        seen = []
        orig = store.advance

        def spy(job_id, state, progress=None):
            out = orig(job_id, state, progress)
            seen.append((out.state, out.progress))
            return out

        store.advance = spy
        done = run_pipeline(job, store, service_config)
        assert done.state == "done"
        progressions = [p for _, p in seen]
        assert progressions == sorted(progressions)
        order = {name: i for i, name in enumerate(STATES)}
        indices = [order[s] for s, _ in seen]
        assert indices == sorted(indices)

    def test_cancellation_between_stages(self, tmp_path, service_config):
        src = make_clip(tmp_path / "c.rvid", four_shot_frames(shot_len=25))
        store = new_store(service_config)
        job = make_job(src, duration=2.0)
        store.save(job)
        calls = []

        def cancelled():
            calls.append(1)
            return len(calls) > 2

        done = run_pipeline(job, store, service_config, cancelled=cancelled)
        assert done.state == "failed"
        assert done.error == "cancelled"


class TestSummarizeFile:
    def test_writes_output_where_asked(self, tmp_path, service_config):
        src = make_clip(tmp_path / "s.rvid", four_shot_frames(shot_len=25))
        out = str(tmp_path / "result" / "summary.rvid")
        spec = spec_from_custom(2.0, "1:1")
        states = []
        job = summarize_file(
            src,
            spec,
            out,
            config=service_config,
            progress=lambda s, p: states.append(s),
        )
        assert os.path.isfile(out)
        assert job.result["output_path"] == out
        assert "rendering" in states
        tc = service_config.transcoder()
        probed = probe(out, tc)
        assert probed.width == probed.height  # 1:1

    def test_failure_raises(self, tmp_path, service_config):
        bad = tmp_path / "bad.rvid"
        bad.write_bytes(b"nope")
        with pytest.raises(RuntimeError):
            summarize_file(str(bad), spec_from_custom(2.0, "1:1"), str(tmp_path / "o.rvid"),
                           config=service_config)
