"""Corner-background prior: rate each region by how weakly it attaches to the
four corner sets, then intersect the four ratings into one map (CBP)."""

from __future__ import annotations

import numpy as np

from .affinity import AffinityGraph
from .pixel_core import normalize_map
from .superpixel import CORNER_NAMES, CORNERS, SuperpixelFeatures


def corner_saliency(
    graph: AffinityGraph, corner: int, f: np.ndarray | None = None
) -> np.ndarray:
    """Saliency against one corner set: (1 - mean transition mass into the set).

    `f` optionally modulates per region (defaults to 1 everywhere).
    """
    members = np.flatnonzero(graph.corner_codes == corner)
    if members.size == 0:
        raise ValueError(f"corner set {CORNER_NAMES.get(corner, corner)} is empty")
    values = 1.0 - graph.transition[:, members].mean(axis=1)
    return values if f is None else values * np.asarray(f, dtype=np.float64)


def combine_corners(
    v_lu: np.ndarray, v_ru: np.ndarray, v_ld: np.ndarray, v_rd: np.ndarray
) -> np.ndarray:
    """Elementwise product of the four corner maps, normalized to [0, 1]."""
    return normalize_map(v_lu * v_ru * v_ld * v_rd)


def region_luma(features: SuperpixelFeatures) -> np.ndarray:
    """Mean lightness per region on a [0, 1] scale."""
    return features.mean_lab[:, 0] / 100.0


def compute_cbp(graph: AffinityGraph, f: np.ndarray | None = None) -> np.ndarray:
    """Full corner-background prior over all four corners."""
    return combine_corners(*(corner_saliency(graph, c, f) for c in CORNERS))
