"""Command-line front end: `detect`, `eval`, and `synth` subcommands.

Exit codes: 0 success, 1 partial or processing failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import _PARSERS, ConfigError, PipelineConfig, apply_overrides, load_config
from .evaluate import evaluate_dataset, synth_corpus, write_corpus, write_report
from .figures import plot_f_bars, plot_pr_curves
from .multilayer import run_pipeline, run_scale
from .objectness import dump_windows
from .pixel_core import read_image, rgb_to_lab, write_map
from .superpixel import region_map

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")


def _add_setting_flags(sub: argparse.ArgumentParser) -> None:
    group = sub.add_argument_group("pipeline settings (override the config file)")
    for name in _PARSERS:
        group.add_argument(f"--{name.replace('_', '-')}", dest=f"cfg_{name}", metavar="V")


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    overrides = {
        name: getattr(args, f"cfg_{name}")
        for name in _PARSERS
        if getattr(args, f"cfg_{name}") is not None
    }
    return apply_overrides(config, overrides) if overrides else config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cornersal",
        description="Salient object detection from corner-background and objectness priors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="write saliency maps for images")
    detect.add_argument("input", help="image file or directory of images")
    detect.add_argument("-o", "--output", required=True, help="output directory")
    detect.add_argument("--config", help="key=value config file")
    detect.add_argument(
        "--dump-intermediates",
        action="store_true",
        help="also write per-scale prior and fused maps",
    )
    detect.add_argument(
        "--single-scale",
        type=int,
        default=0,
        metavar="N",
        help="run one superpixel count and emit its fused map only",
    )
    detect.add_argument("--jobs", type=int, default=1, help="worker processes")
    _add_setting_flags(detect)

    evaluate = sub.add_parser("eval", help="evaluate detection over a dataset directory")
    evaluate.add_argument("dataset", help="directory with images/ and masks/")
    evaluate.add_argument("-o", "--report", required=True, help="report file to write")
    evaluate.add_argument("--config", help="key=value config file")
    evaluate.add_argument("--jobs", type=int, default=1, help="worker processes")
    _add_setting_flags(evaluate)

    synth = sub.add_parser("synth", help="generate a synthetic evaluation corpus")
    synth.add_argument("output", help="corpus directory to create")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--count", type=int, required=True, help="number of samples")
    return parser


def _detect_one(image_path: str, out_dir: str, config: PipelineConfig, dump: bool, scale: int):
    img = read_image(image_path)
    stem = Path(image_path).stem
    out = Path(out_dir)
    if scale:
        result = run_scale(rgb_to_lab(img), scale, config)
        write_map(out / f"{stem}_slp_{scale}.png", result.slp_pixels)
        scale_results = [result] if dump else []
    else:
        pipeline = run_pipeline(img, config)
        write_map(out / f"{stem}_mlp.png", pipeline.mlp)
        scale_results = pipeline.per_scale if dump else []
    for r in scale_results:
        write_map(out / f"{stem}_cbp_{r.scale}.png", region_map(r.labeling, r.cbp))
        write_map(out / f"{stem}_ofp_{r.scale}.png", region_map(r.labeling, r.ofp))
        write_map(out / f"{stem}_slp_{r.scale}.png", r.slp_pixels)
        dump_windows(out / f"{stem}_windows_{r.scale}.txt", r.windows, r.psi)


def _detect_worker(packed):
    try:
        _detect_one(*packed)
        return packed[0], None
    except Exception as err:
        return packed[0], str(err)


def _cmd_detect(args: argparse.Namespace) -> int:
    source = Path(args.input)
    if not source.exists():
        print(f"input not found: {source}", file=sys.stderr)
        return 2
    if args.single_scale < 0 or args.jobs < 1:
        print("--single-scale and --jobs must be positive", file=sys.stderr)
        return 2
    config = _resolve_config(args)
    if source.is_dir():
        paths = sorted(p for p in source.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    else:
        paths = [source]
    if not paths:
        print(f"no images under {source}", file=sys.stderr)
        return 2
    Path(args.output).mkdir(parents=True, exist_ok=True)

    tasks = [
        (str(p), args.output, config, args.dump_intermediates, args.single_scale) for p in paths
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_detect_worker, tasks))
    else:
        outcomes = [_detect_worker(task) for task in tasks]

    failures = [(path, reason) for path, reason in outcomes if reason is not None]
    for path, reason in failures:
        print(f"failed: {path}: {reason}", file=sys.stderr)
    return 1 if failures else 0


def _cmd_eval(args: argparse.Namespace) -> int:
    dataset = Path(args.dataset)
    if not dataset.is_dir():
        print(f"dataset not found: {dataset}", file=sys.stderr)
        return 2
    if args.jobs < 1:
        print("--jobs must be positive", file=sys.stderr)
        return 2
    config = _resolve_config(args)
    try:
        integrated, baseline = evaluate_dataset(dataset, config, jobs=args.jobs)
    except ValueError as err:  # nothing to evaluate
        print(str(err), file=sys.stderr)
        return 2
    except RuntimeError as err:
        print(str(err), file=sys.stderr)
        return 1

    report_path = Path(args.report)
    if report_path.parent != Path(""):
        report_path.parent.mkdir(parents=True, exist_ok=True)
    write_report(integrated, report_path)
    write_report(
        baseline, report_path.with_name(report_path.stem + "_meanfusion" + report_path.suffix)
    )
    labeled = {"multilayer": integrated, "mean fusion": baseline}
    plot_pr_curves(labeled, report_path.with_name(report_path.stem + "_pr.png"))
    plot_f_bars(labeled, report_path.with_name(report_path.stem + "_fmeasure.png"))

    print(f"multilayer adaptive F: {integrated.adaptive_f:.6f}")
    print(f"mean-fusion adaptive F: {baseline.adaptive_f:.6f}")
    for stem, reason in integrated.skipped:
        print(f"skipped: {stem}: {reason}", file=sys.stderr)
    return 1 if integrated.skipped else 0


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.count < 1 or args.seed < 0:
        print("--count must be >= 1 and --seed >= 0", file=sys.stderr)
        return 2
    samples = synth_corpus(args.seed, args.count)
    write_corpus(samples, args.output)
    print(f"wrote {len(samples)} samples to {args.output}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "detect":
            return _cmd_detect(args)
        if args.command == "eval":
            return _cmd_eval(args)
        return _cmd_synth(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(str(err), file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
