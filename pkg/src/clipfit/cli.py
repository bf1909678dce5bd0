"""Command line interface: one-shot summarization, evaluation, and the service."""

import argparse
import json
import sys

from .config import load_config
from .presets import InvalidSpec, UnknownPreset, spec_from_custom, spec_from_preset


def _add_summarize(sub):
    p = sub.add_parser("summarize", help="produce one summary without the service")
    p.add_argument("input", help="video file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", help="platform preset id")
    group.add_argument("--duration", type=float, help="target duration in seconds")
    p.add_argument("--aspect", help="target aspect ratio W:H (with --duration)")
    p.add_argument("--scores", help="per-frame importance score file")
    p.add_argument("--saliency", help="saliency sidecar (SALM file or PNG dir)")
    p.add_argument("--shots", help="shot boundary JSON file")
    p.add_argument("-o", "--output", required=True, help="output media path")
    p.add_argument("--config", help="service config file (transcoder settings)")


def _add_evaluate(sub):
    p = sub.add_parser("evaluate", help="run a measurement protocol")
    esub = p.add_subparsers(dest="protocol", required=True)

    pf = esub.add_parser("fscore", help="machine summary vs annotator summaries")
    pf.add_argument("--machine", required=True, help="JSON 0/1 array, one per frame")
    pf.add_argument("--annotations", required=True, help="annotation JSON file")
    pf.add_argument("--mode", choices=("max", "mean"), default="mean")
    pf.add_argument("--json", action="store_true", dest="as_json")

    pi = esub.add_parser("iou", help="machine crop trace vs annotated windows")
    pi.add_argument("--machine", required=True, help="crop trace JSON file")
    pi.add_argument("--annotations", required=True, help="annotation JSON file")
    pi.add_argument("--json", action="store_true", dest="as_json")


def _add_serve(sub):
    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="config file (key = value lines)")


def _cmd_summarize(args) -> int:
    from .pipeline import summarize_file

    try:
        if args.preset:
            spec = spec_from_preset(args.preset)
        else:
            if not args.aspect:
                print("error: --aspect is required with --duration", file=sys.stderr)
                return 2
            spec = spec_from_custom(args.duration, args.aspect)
    except UnknownPreset as exc:
        print(f"error: unknown preset {exc.args[0]!r}", file=sys.stderr)
        return 2
    except InvalidSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sidecars = {
        k: v
        for k, v in (("scores", args.scores), ("saliency", args.saliency), ("shots", args.shots))
        if v
    }
    if args.config:
        config = load_config(args.config)
    else:
        import tempfile

        from .config import ServiceConfig

        config = ServiceConfig(data_dir=tempfile.mkdtemp(prefix="clipfit-"))

    def report(state, progress):
        print(f"  {state:<12} {progress * 100:5.1f}%", flush=True)

    try:
        job = summarize_file(
            args.input, spec, args.output, config=config, sidecars=sidecars, progress=report
        )
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    result = job.result
    print(f"wrote {result['output_path']}")
    print(
        f"  {result['summary_frames']} frames, {result['summary_duration_sec']:.2f}s, "
        f"{result['width']}x{result['height']}"
    )
    return 0


def _cmd_evaluate(args) -> int:
    from . import evaluation
    from .cropping import trace_from_json

    if args.protocol == "fscore":
        with open(args.machine) as fh:
            machine = json.load(fh)
        users = evaluation.load_summary_annotations(args.annotations)
        score = evaluation.fscore_protocol(machine, users, mode=args.mode)
        if args.as_json:
            print(json.dumps({"mode": args.mode, "f1": score}))
        else:
            print(f"F({args.mode}) = {score * 100:.1f}")
    else:
        with open(args.machine) as fh:
            trace = trace_from_json(fh.read())
        machine = [w for _, w in trace]
        annotations = evaluation.load_crop_annotations(args.annotations)
        worst, best, mean = evaluation.iou_report(machine, annotations)
        if args.as_json:
            print(json.dumps({"worst": worst, "best": best, "mean": mean}))
        else:
            print(f"Worst {worst:.1f} | Best {best:.1f} | Mean {mean:.1f}")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(load_config(args.config))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="clipfit")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_summarize(sub)
    _add_evaluate(sub)
    _add_serve(sub)
    args = parser.parse_args(argv)
    if args.command == "summarize":
        return _cmd_summarize(args)
    if args.command == "evaluate":
        return _cmd_evaluate(args)
    return _cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
