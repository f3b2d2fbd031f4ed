"""Multi-scale orchestration: per-scale saliency maps, similarity-weighted
integration of the stack, and guided refinement of the final map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affinity import build_graph
from .config import PipelineConfig
from .corner_prior import compute_cbp, region_luma
from .energy import binarize_adaptive, fuse_slp, optimize_energy
from .objectness import WindowCandidate, pixel_objectness, propose_windows, region_objectness
from .pixel_core import default_guided_radius, guided_filter, normalize_map, rgb_to_lab
from .superpixel import (
    SuperpixelLabeling,
    extract_features,
    region_map,
    slic_segment,
)


class PipelineError(RuntimeError):
    """Stage failure annotated with the scale and stage it occurred in."""


@dataclass
class ScaleResult:
    scale: int
    labeling: SuperpixelLabeling
    cbp: np.ndarray  # region values, normalized
    ofp: np.ndarray
    cbp_refined: np.ndarray
    ofp_refined: np.ndarray
    slp: np.ndarray  # fused region values
    slp_pixels: np.ndarray  # (h, w) rendering of slp
    windows: list[WindowCandidate]
    psi: np.ndarray


@dataclass
class ScaleStack:
    scales: list[int]
    slp_maps: list[np.ndarray]
    similarity: np.ndarray  # (M, M) pairwise agreement after binarization
    judgment: np.ndarray  # (M,) row means of similarity
    weights: np.ndarray  # (M,) judgment with the least-similar map raised to 1


@dataclass
class PipelineResult:
    lab: np.ndarray
    per_scale: list[ScaleResult]
    stack: ScaleStack
    mlp: np.ndarray  # (h, w) final map


def similarity_matrix(maps: list[np.ndarray]) -> np.ndarray:
    """Fraction of pixels agreeing between each pair of mean-binarized maps."""
    if not maps:
        raise ValueError("no maps to compare")
    shape = maps[0].shape
    if any(m.shape != shape for m in maps):
        raise ValueError("maps differ in dimensions")
    binary = np.stack([(m >= m.mean()).ravel() for m in maps]).astype(np.float64)
    agree = binary @ binary.T + (1.0 - binary) @ (1.0 - binary).T
    return agree / binary.shape[1]


def build_stack(slp_maps: list[np.ndarray], scales: list[int]) -> ScaleStack:
    """Judge each map by mean similarity to the stack; the outlier gets weight 1."""
    if len(slp_maps) != len(scales):
        raise ValueError("one map per scale required")
    similarity = similarity_matrix(slp_maps)
    judgment = similarity.mean(axis=1)
    weights = judgment.copy()
    weights[np.argmin(judgment)] = 1.0  # ties resolve to the smallest index
    return ScaleStack(
        scales=list(scales),
        slp_maps=list(slp_maps),
        similarity=similarity,
        judgment=judgment,
        weights=weights,
    )


def integrate_multilayer(
    stack: ScaleStack,
    lab: np.ndarray | None = None,
    radius: int = 0,
    eps: float = 1e-3,
) -> np.ndarray:
    """Weighted sum of the stack, guided-filtered against the image when given."""
    combined = np.zeros_like(stack.slp_maps[0])
    for weight, slp in zip(stack.weights, stack.slp_maps):
        combined += weight * slp
    combined = normalize_map(combined)
    if lab is None:
        return combined
    h, w = combined.shape
    if radius < 1:
        radius = default_guided_radius(h, w)
    return normalize_map(guided_filter(lab, combined, radius, eps))


def run_scale(lab: np.ndarray, scale: int, config: PipelineConfig) -> ScaleResult:
    """One single-layer pass: segment, build priors, refine, fuse."""
    stage = "superpixel"
    try:
        labeling = slic_segment(lab, scale)
        stage = "features"
        features = extract_features(labeling, lab, config.corner_fraction)
        stage = "affinity"
        graph = build_graph(features, config.sigma1, config.sigma2, config.squared_distance)
        stage = "corner-prior"
        f = region_luma(features) if config.f_mode == "luma" else None
        cbp = compute_cbp(graph, f)
        stage = "objectness-prior"
        windows = propose_windows(lab, features, config.h_count)
        objectness = pixel_objectness(windows, region_map(labeling, cbp), config.beta)
        ofp = region_objectness(objectness, labeling)
        stage = "energy"
        cbp_refined = optimize_energy(
            cbp, binarize_adaptive(cbp), graph, config.literal_log_sign
        )
        ofp_refined = optimize_energy(
            ofp, binarize_adaptive(ofp), graph, config.literal_log_sign
        )
        stage = "fusion"
        slp = fuse_slp(cbp_refined, ofp_refined, config.eta)
    except PipelineError:
        raise
    except Exception as err:
        raise PipelineError(f"scale {scale}, stage {stage}: {err}") from err
    return ScaleResult(
        scale=scale,
        labeling=labeling,
        cbp=cbp,
        ofp=ofp,
        cbp_refined=cbp_refined,
        ofp_refined=ofp_refined,
        slp=slp,
        slp_pixels=region_map(labeling, slp),
        windows=windows,
        psi=objectness.psi,
    )


def run_pipeline(img: np.ndarray, config: PipelineConfig | None = None) -> PipelineResult:
    """Full detection: every configured scale, then stack integration."""
    if config is None:
        config = PipelineConfig()
    lab = rgb_to_lab(img)
    per_scale = [run_scale(lab, scale, config) for scale in config.scales]
    try:
        stack = build_stack([r.slp_pixels for r in per_scale], list(config.scales))
        mlp = integrate_multilayer(stack, lab, config.guided_radius, config.guided_eps)
    except Exception as err:
        raise PipelineError(f"integration: {err}") from err
    return PipelineResult(lab=lab, per_scale=per_scale, stack=stack, mlp=mlp)
