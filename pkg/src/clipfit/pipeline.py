"""End-to-end summary pipeline: fetch, probe, segment, score, select,
saliency, crop, render.

Each stage advances the persisted job state and progress; any stage error
turns the job failed with the stage and cause in the message. Precomputed
sidecar files (shots, scores, saliency) replace the corresponding built-in
analysis when attached.
"""

import json
import os
import urllib.parse

import numpy as np

from . import media, saliency, scoring, selection, shots
from .config import ServiceConfig
from .cropping import AspectRatio, plan_windows
from .jobs import JobStore, SummaryJob

# progress gained by the time each stage completes
_STAGE_GAIN = (
    ("fetching", 0.05),
    ("probing", 0.10),
    ("segmenting", 0.30),
    ("scoring", 0.40),
    ("selecting", 0.45),
    ("saliency", 0.70),
    ("cropping", 0.80),
    ("rendering", 1.0),
)
_GAIN = dict(_STAGE_GAIN)


class Cancelled(RuntimeError):
    pass


def _is_url(source: str) -> bool:
    return urllib.parse.urlparse(source).scheme.lower() in ("http", "https")


def _url_extension(url: str) -> str:
    path = urllib.parse.urlparse(url).path
    ext = os.path.splitext(path)[1]
    return ext if ext else ".mp4"


def _analyze_stream(frames):
    """One decode pass producing both histogram distances and motion signal."""
    distances = []
    motion = []
    prev_hist = None
    prev_gray = None
    count = 0
    for frame in frames:
        gray = saliency._to_gray(frame.pixels)
        hist = shots.grayscale_histogram(gray)
        if prev_hist is not None:
            distances.append(shots.chi_square_distance(prev_hist, hist))
            motion.append(float(np.abs(gray - prev_gray).mean()))
        prev_hist, prev_gray = hist, gray
        count += 1
    return distances, motion, count


def run_pipeline(job: SummaryJob, store: JobStore, config: ServiceConfig, cancelled=None):
    """Execute all stages for a queued job; returns the terminal job record."""
    cancelled = cancelled or (lambda: False)
    workdir = os.path.join(config.work_dir, job.id)
    os.makedirs(workdir, exist_ok=True)
    transcoder = config.transcoder()

    def check_cancel():
        if cancelled():
            raise Cancelled("cancelled")

    def enter(state):
        check_cancel()
        return store.advance(job.id, state)

    stage = "fetching"
    try:
        # fetch: pull remote source and any remote sidecars into the workdir
        source_path = job.source
        if _is_url(job.source) or any(_is_url(v) for v in job.sidecars.values()):
            enter("fetching")
            if _is_url(job.source):
                source_path = os.path.join(workdir, "source" + _url_extension(job.source))
                media.fetch(job.source, source_path, timeout=config.fetch_timeout_sec)
            for kind, ref in list(job.sidecars.items()):
                if _is_url(ref):
                    local = os.path.join(workdir, f"sidecar-{kind}")
                    media.fetch(ref, local, timeout=config.fetch_timeout_sec)
                    job.sidecars[kind] = local
            store.save(job)
        store.advance(job.id, "fetching", _GAIN["fetching"])

        stage = "probing"
        enter("probing")
        asset = media.probe(source_path, transcoder)
        store.advance(job.id, "probing", _GAIN["probing"])

        spec_aspect = AspectRatio.parse(job.spec["aspect"])
        target_duration = float(job.spec["target_duration"])

        stage = "segmenting"
        enter("segmenting")
        distances = motion = None
        if "shots" not in job.sidecars or "scores" not in job.sidecars:
            distances, motion, n = _analyze_stream(media.decode_frames(asset, transcoder))
            if n != asset.frame_count:
                raise media.DecodeFailure(n, "decode count disagrees with probe")
        if "shots" in job.sidecars:
            shot_list = shots.import_shots(job.sidecars["shots"], asset.frame_count)
        else:
            boundaries = shots.boundaries_from_distances(distances, min_shot_len=10, sensitivity=3.0)
            shot_list = shots.shots_from_boundaries(boundaries, asset.frame_count)
            shots.validate_partition(shot_list, asset.frame_count)
        store.advance(job.id, "segmenting", _GAIN["segmenting"])

        stage = "scoring"
        enter("scoring")
        if "scores" in job.sidecars:
            series = scoring.import_scores(job.sidecars["scores"], asset.frame_count)
        else:
            raw = [motion[0]] + motion if motion else [0.0]
            series = scoring.normalize_motion(np.asarray(raw))
        store.advance(job.id, "scoring", _GAIN["scoring"])

        stage = "selecting"
        enter("selecting")
        budget = selection.budget_frames(target_duration, asset.frame_rate)
        values_weights = selection.aggregate_shot_values(series, shot_list)
        chosen = selection.select_fragments(values_weights, budget)
        fragments = selection.assemble(chosen, shot_list)
        if not fragments:
            raise media.EmptySelection(
                f"no shot fits the {target_duration:.1f}s budget ({budget} frames)"
            )
        summary_indices = [i for s, e in fragments for i in range(s, e + 1)]
        store.advance(job.id, "selecting", _GAIN["selecting"])

        stage = "saliency"
        enter("saliency")
        if "saliency" in job.sidecars:
            maps = saliency.import_saliency(job.sidecars["saliency"], len(summary_indices))
        else:
            wanted = set(summary_indices)
            by_index = {}
            for frame in media.decode_frames(asset, transcoder):
                if frame.index in wanted:
                    by_index[frame.index] = saliency.spectral_residual(frame.pixels)
                check_cancel()
            maps = [by_index[i] for i in summary_indices]
        store.advance(job.id, "saliency", _GAIN["saliency"])

        stage = "cropping"
        enter("cropping")
        starts = []
        acc = 0
        for s, e in fragments:
            starts.append(acc)
            acc += e - s + 1
        windows = plan_windows(maps, starts, asset.width, asset.height, spec_aspect)
        trace = [
            {"frame": int(f), "x": w.x, "y": w.y, "w": w.w, "h": w.h}
            for f, w in zip(summary_indices, windows)
        ]
        trace_path = os.path.join(workdir, "crop_trace.json")
        with open(trace_path, "w") as fh:
            json.dump(trace, fh)
        store.advance(job.id, "cropping", _GAIN["cropping"])

        stage = "rendering"
        enter("rendering")
        output_path = os.path.join(workdir, f"summary.{config.output_container}")
        media.render_summary(
            asset,
            fragments,
            windows,
            media.OutputSpec(path=output_path),
            transcoder,
        )
        summary_frames = len(summary_indices)
        result = {
            "fragments": [[int(s), int(e)] for s, e in fragments],
            "crop_trace": trace,
            "output_path": output_path,
            "summary_frames": summary_frames,
            "summary_duration_sec": summary_frames / float(asset.frame_rate),
            "source_duration_sec": asset.duration,
            "source_frames": asset.frame_count,
            "width": windows[0].w if windows else 0,
            "height": windows[0].h if windows else 0,
            "spec": dict(job.spec),
        }
        store.set_result(job.id, result)
        store.advance(job.id, "rendering", _GAIN["rendering"])
        return store.advance(job.id, "done")
    except Cancelled:
        return store.fail(job.id, "cancelled")
    except Exception as exc:
        return store.fail(job.id, f"{stage}: {exc}")


def summarize_file(
    input_path: str,
    spec,
    output_path: str,
    config: ServiceConfig | None = None,
    sidecars: dict | None = None,
    progress=None,
):
    """CLI entry: run the pipeline synchronously outside the job service."""
    import dataclasses
    import shutil
    import tempfile

    config = config or ServiceConfig(data_dir=tempfile.mkdtemp(prefix="clipfit-"))
    container = os.path.splitext(output_path)[1].lstrip(".")
    if container:
        config = dataclasses.replace(config, output_container=container)
    store = JobStore(config.jobs_dir)
    job = SummaryJob.new(
        source=os.path.abspath(input_path),
        spec={
            "target_duration": spec.target_duration,
            "aspect": str(spec.aspect),
            "origin": spec.origin,
        },
        sidecars={k: os.path.abspath(v) for k, v in (sidecars or {}).items()},
    )
    store.save(job)
    if progress:
        orig_advance = store.advance

        def advance(job_id, state, prog=None):
            out = orig_advance(job_id, state, prog)
            progress(out.state, out.progress)
            return out

        store.advance = advance
    job = run_pipeline(job, store, config)
    if job.state == "failed":
        raise RuntimeError(job.error)
    rendered = job.result["output_path"]
    if os.path.abspath(rendered) != os.path.abspath(output_path):
        os.makedirs(os.path.dirname(os.path.abspath(output_path)) or ".", exist_ok=True)
        shutil.move(rendered, output_path)
        job.result["output_path"] = output_path
        store.save(job)
    return job
