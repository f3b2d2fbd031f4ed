"""Evaluation harness: threshold sweeps, F-measure, synthetic corpus
generation, and directory-based dataset runs with a mean-fusion baseline."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .multilayer import run_pipeline
from .pixel_core import quantize_u8, read_image, read_mask, write_image, write_map

DEFAULT_BETA2 = 0.3
CORPUS_WIDTH = 240
CORPUS_HEIGHT = 180
CORPUS_CORNER_FRACTION = 0.15
MIN_OBJECT_FRACTION = 0.02
MAX_OBJECT_FRACTION = 0.40
MAX_CORNER_OVERLAP = 0.05


@dataclass
class EvalReport:
    precision: np.ndarray  # (256,) mean precision per threshold
    recall: np.ndarray  # (256,)
    adaptive_f: float  # mean adaptive-threshold F over samples
    beta2: float
    sample_count: int
    per_sample: list[tuple[str, float]] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)


def _quantized(saliency: np.ndarray) -> np.ndarray:
    saliency = np.asarray(saliency)
    return saliency if saliency.dtype == np.uint8 else quantize_u8(saliency)


def pr_curve(saliency: np.ndarray, gt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Precision/recall at every 8-bit threshold t, predicting value >= t."""
    q = _quantized(saliency)
    gt = np.asarray(gt, dtype=bool)
    if q.shape != gt.shape:
        raise ValueError("saliency and ground truth dimensions differ")
    positives = int(gt.sum())
    if positives == 0:
        raise ValueError("empty ground truth")
    hist_all = np.bincount(q.ravel(), minlength=256)
    hist_pos = np.bincount(q[gt].ravel(), minlength=256)
    predicted = np.cumsum(hist_all[::-1])[::-1]  # count of pixels >= t
    tp = np.cumsum(hist_pos[::-1])[::-1]
    precision = np.where(predicted > 0, tp / np.maximum(predicted, 1), 1.0)
    recall = tp / positives
    return precision, recall


def f_measure(precision: float, recall: float, beta2: float = DEFAULT_BETA2) -> float:
    """Precision-weighted harmonic mean; 0 when both inputs are 0."""
    denominator = beta2 * precision + recall
    if denominator == 0.0:
        return 0.0
    return (1.0 + beta2) * precision * recall / denominator


def adaptive_f(saliency: np.ndarray, gt: np.ndarray, beta2: float = DEFAULT_BETA2) -> float:
    """F-measure after binarizing at twice the map mean (clamped to 255)."""
    q = _quantized(saliency)
    gt = np.asarray(gt, dtype=bool)
    if q.shape != gt.shape:
        raise ValueError("saliency and ground truth dimensions differ")
    positives = int(gt.sum())
    if positives == 0:
        raise ValueError("empty ground truth")
    threshold = min(2.0 * q.mean(), 255.0)
    predicted = q > threshold
    tp = int((predicted & gt).sum())
    total_pred = int(predicted.sum())
    precision = tp / total_pred if total_pred > 0 else 1.0
    recall = tp / positives
    return f_measure(precision, recall, beta2)


@dataclass
class SynthSample:
    name: str
    image: np.ndarray  # (h, w, 3) uint8
    mask: np.ndarray  # (h, w) bool


def _corner_pixels(mask: np.ndarray, side: int) -> int:
    return int(
        mask[:side, :side].sum()
        + mask[:side, -side:].sum()
        + mask[-side:, :side].sum()
        + mask[-side:, -side:].sum()
    )


def _render_object(
    rng: np.random.Generator, image: np.ndarray, base: np.ndarray, secondary: bool
) -> np.ndarray:
    """Draw one shaded ellipse or rectangle; returns its mask.

    Placement mimics the center bias of the standard benchmarks: a dominant
    object near the middle, any companion smaller and nearby.
    """
    h, w = image.shape[:2]
    while True:
        color = rng.uniform(0.0, 255.0, size=3)
        if np.linalg.norm(color - base) >= 110.0:
            break
    if secondary:
        area = rng.uniform(0.03, 0.08) * w * h
        cx = rng.uniform(0.30 * w, 0.70 * w)
        cy = rng.uniform(0.30 * h, 0.70 * h)
    else:
        area = rng.uniform(0.08, 0.24) * w * h
        cx = rng.uniform(0.36 * w, 0.64 * w)
        cy = rng.uniform(0.36 * h, 0.64 * h)
    aspect = rng.uniform(0.6, 1.7)
    half_w = np.sqrt(area * aspect) / 2.0
    half_h = np.sqrt(area / aspect) / 2.0

    ys, xs = np.mgrid[0:h, 0:w]
    dx = (xs - cx) / half_w
    dy = (ys - cy) / half_h
    if rng.random() < 0.5:
        inside = dx**2 + dy**2 <= 1.0
        shade = 1.0 - 0.3 * np.clip(dx**2 + dy**2, 0.0, 1.0)
    else:
        inside = (np.abs(dx) <= 1.0) & (np.abs(dy) <= 1.0)
        shade = 1.0 - 0.3 * np.clip(np.maximum(np.abs(dx), np.abs(dy)), 0.0, 1.0)
    image[inside] = np.clip(color[None, :] * shade[inside, None], 0.0, 255.0)
    return inside


def _render_clutter(rng: np.random.Generator, image: np.ndarray, base: np.ndarray, mask: np.ndarray) -> None:
    """Scatter a few small high-contrast dots over the background.

    The dots are distractors, not ground truth: they stay clear of the
    labelled objects and reward detectors that suppress isolated speckle.
    """
    h, w = image.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w]
    wanted = rng.integers(2, 5)
    placed = 0
    for _ in range(40):
        if placed >= wanted:
            break
        radius = rng.uniform(2.0, 4.0)
        cx = rng.uniform(radius + 2.0, w - radius - 2.0)
        cy = rng.uniform(radius + 2.0, h - radius - 2.0)
        margin = radius + 6.0
        near = (np.abs(xs - cx) <= margin) & (np.abs(ys - cy) <= margin)
        if (mask & near).any():
            continue
        while True:
            color = rng.uniform(0.0, 255.0, size=3)
            if np.linalg.norm(color - base) >= 110.0:
                break
        image[(xs - cx) ** 2 + (ys - cy) ** 2 <= radius**2] = color
        placed += 1


def _render_scene(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    h, w = CORPUS_HEIGHT, CORPUS_WIDTH
    base = rng.uniform(50.0, 205.0, size=3)
    ys, xs = np.mgrid[0:h, 0:w]
    angle = rng.uniform(0.0, 2.0 * np.pi)
    ramp = (np.cos(angle) * xs / w + np.sin(angle) * ys / h) * rng.uniform(10.0, 30.0)
    ripple = 3.0 * np.sin(2.0 * np.pi * xs / rng.uniform(40.0, 90.0))
    image = base[None, None, :] + (ramp + ripple)[..., None]
    image += rng.normal(0.0, 4.0, size=(h, w, 3))
    image = np.clip(image, 0.0, 255.0)

    mask = np.zeros((h, w), dtype=bool)
    for index in range(1 + (rng.random() < 0.25)):
        mask |= _render_object(rng, image, base, secondary=index > 0)
    _render_clutter(rng, image, base, mask)
    return image.astype(np.uint8), mask


def synth_corpus(seed: int, count: int) -> list[SynthSample]:
    """Deterministic corpus of shaded objects on textured backgrounds.

    Objects avoid the image corners so the corner-background assumption the
    detector rests on holds for the ground truth.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    corner_side = int(np.ceil(CORPUS_CORNER_FRACTION * min(CORPUS_WIDTH, CORPUS_HEIGHT)))
    area = CORPUS_WIDTH * CORPUS_HEIGHT
    samples = []
    for index in range(count):
        rng = np.random.default_rng((seed, index))
        for _ in range(100):
            image, mask = _render_scene(rng)
            fraction = mask.sum() / area
            if not MIN_OBJECT_FRACTION <= fraction <= MAX_OBJECT_FRACTION:
                continue
            if _corner_pixels(mask, corner_side) < MAX_CORNER_OVERLAP * mask.sum():
                break
        else:
            raise RuntimeError(f"could not place sample {index} within constraints")
        samples.append(SynthSample(name=f"synth_{index:03d}", image=image, mask=mask))
    return samples


def write_corpus(samples: list[SynthSample], out_dir) -> None:
    """Write images/ and masks/ subdirectories, matched by stem."""
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)
    for sample in samples:
        write_image(out_dir / "images" / f"{sample.name}.png", sample.image)
        write_map(out_dir / "masks" / f"{sample.name}.png", sample.mask.astype(np.float64))


def mean_fusion(slp_maps: list[np.ndarray]) -> np.ndarray:
    """Baseline integration: plain average of the per-scale maps."""
    return np.mean(slp_maps, axis=0)


def _eval_sample(
    image_path: str, mask_path: str, config: PipelineConfig, saliency_fn=None
) -> tuple[np.ndarray, ...]:
    img = read_image(image_path)
    gt = read_mask(mask_path)
    if gt.shape != img.shape[:2]:
        raise ValueError("mask dimensions differ from image")
    if saliency_fn is not None:
        mlp, fused = saliency_fn(img)
    else:
        result = run_pipeline(img, config)
        mlp = result.mlp
        fused = mean_fusion(result.stack.slp_maps)
    out = []
    for saliency in (mlp, fused):
        precision, recall = pr_curve(saliency, gt)
        out.extend([precision, recall, adaptive_f(saliency, gt, config.beta2)])
    return tuple(out)


def _eval_worker(packed):
    stem, image_path, mask_path, config = packed
    try:
        return stem, _eval_sample(image_path, mask_path, config), None
    except Exception as err:  # reported per sample, evaluation continues
        return stem, None, str(err)


def discover_samples(dataset_dir) -> list[tuple[str, Path, Path]]:
    """Pair images/<stem>.png with masks/<stem>.png, sorted by stem."""
    dataset_dir = Path(dataset_dir)
    image_dir = dataset_dir / "images"
    if not image_dir.is_dir():
        raise ValueError(f"no images/ directory under {dataset_dir}")
    pairs = []
    for image_path in sorted(image_dir.glob("*.png")):
        pairs.append((image_path.stem, image_path, dataset_dir / "masks" / image_path.name))
    if not pairs:
        raise ValueError(f"no samples under {dataset_dir}")
    return pairs


def evaluate_dataset(
    dataset_dir,
    config: PipelineConfig | None = None,
    jobs: int = 1,
    saliency_fn=None,
) -> tuple[EvalReport, EvalReport]:
    """Run detection over a dataset; returns (integrated, mean-fusion) reports.

    Aggregation averages per-sample precision/recall at each threshold, in
    sorted-stem order, so the result is independent of worker scheduling.
    """
    if config is None:
        config = PipelineConfig()
    pairs = discover_samples(dataset_dir)
    tasks = [(stem, str(img), str(mask), config) for stem, img, mask in pairs]

    if jobs > 1 and saliency_fn is None:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_eval_worker, tasks))
    else:
        outcomes = [
            (stem, *_try_eval(img, mask, config, saliency_fn)) for stem, img, mask, _ in tasks
        ]

    skipped = [(stem, reason) for stem, _, reason in outcomes if reason is not None]
    kept = [(stem, payload) for stem, payload, reason in outcomes if reason is None]
    if not kept:
        raise RuntimeError("every sample failed evaluation")

    reports = []
    for offset in (0, 3):  # integrated map, then the mean-fusion baseline
        precision = np.mean([payload[offset] for _, payload in kept], axis=0)
        recall = np.mean([payload[offset + 1] for _, payload in kept], axis=0)
        per_sample = [(stem, payload[offset + 2]) for stem, payload in kept]
        reports.append(
            EvalReport(
                precision=precision,
                recall=recall,
                adaptive_f=float(np.mean([f for _, f in per_sample])),
                beta2=config.beta2,
                sample_count=len(kept),
                per_sample=per_sample,
                skipped=list(skipped),
            )
        )
    return reports[0], reports[1]


def _try_eval(image_path, mask_path, config, saliency_fn):
    try:
        return _eval_sample(image_path, mask_path, config, saliency_fn), None
    except Exception as err:
        return None, str(err)


def write_report(report: EvalReport, path) -> None:
    """256 `threshold,precision,recall` lines plus one summary line."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for t in range(256):
            fh.write(f"{t},{report.precision[t]:.6f},{report.recall[t]:.6f}\n")
        fh.write(f"{report.adaptive_f:.6f},{report.beta2:.6f},{report.sample_count}\n")
