"""Objectness prior: window proposals scored by center-surround color contrast,
re-centered Gaussian splatting weighted by prior mass, pooled per region."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .affinity import scale_lab
from .pixel_core import normalize_map
from .superpixel import SuperpixelFeatures, SuperpixelLabeling, region_means

WINDOW_SCALES = (0.2, 0.35, 0.5, 0.7, 0.9)  # of min(width, height)
WINDOW_ASPECTS = (0.5, 1.0, 2.0)
MIN_WINDOW_AREA = 64
DEFAULT_H_COUNT = 200
DEFAULT_BETA = 1.0
CONTRAST_FLOOR = 1e-9  # mean Lab distances below this are float dust, not contrast


@dataclass
class WindowCandidate:
    x0: int  # bounds are inclusive-exclusive pixel coordinates
    y0: int
    x1: int
    y1: int
    score: float  # center-surround contrast, normalized to [0, 1] over the grid


@dataclass
class ObjectnessResult:
    pixel_map: np.ndarray  # (h, w) accumulated window mass, normalized
    psi: np.ndarray  # (n_windows,) accuracy weight of each window


def _window_dims(width: int, height: int) -> list[tuple[int, int]]:
    side = min(width, height)
    dims = []
    for scale in WINDOW_SCALES:
        for aspect in WINDOW_ASPECTS:
            ww = int(round(scale * side * np.sqrt(aspect)))
            wh = int(round(scale * side / np.sqrt(aspect)))
            if ww <= width and wh <= height and ww * wh >= MIN_WINDOW_AREA:
                dims.append((ww, wh))
    return list(dict.fromkeys(dims))  # rounding can collide; keep first occurrence


def _grid_boxes(width: int, height: int) -> np.ndarray:
    boxes = []
    for ww, wh in _window_dims(width, height):
        sx = max(1, int(round(ww / 8)))
        sy = max(1, int(round(wh / 8)))
        for y0 in range(0, height - wh + 1, sy):
            for x0 in range(0, width - ww + 1, sx):
                boxes.append((x0, y0, x0 + ww, y0 + wh))
    return np.array(boxes, dtype=np.int64).reshape(-1, 4)


def propose_windows(
    lab: np.ndarray, features: SuperpixelFeatures, h_count: int = DEFAULT_H_COUNT
) -> list[WindowCandidate]:
    """Score a fixed multi-scale window grid by inside/surround region contrast.

    A region counts as inside when its centroid falls in the window; the
    surround holds every region whose bounding box overlaps the window
    dilated 2x about its center, minus the inside set — so an object cut by
    the window edge always shows up in the surround and dilutes the score.
    Scores are the mean pairwise scaled-Lab distance between the two sets,
    normalized over the grid; the top `h_count` windows are returned. Equal
    scores (possible on flat-colored scenes) rank larger windows first, as
    they enclose more of the contrasting object; remaining ties keep grid
    order.
    """
    if h_count < 1:
        raise ValueError("h_count must be >= 1")
    h, w = lab.shape[:2]
    boxes = _grid_boxes(w, h)
    if boxes.shape[0] == 0:
        raise ValueError(f"image {w}x{h} too small for the smallest window scale")

    px = features.centroid[:, 0] * max(w - 1, 1)
    py = features.centroid[:, 1] * max(h - 1, 1)
    x0, y0, x1, y1 = (boxes[:, k : k + 1].astype(np.float64) for k in range(4))
    inside = (px >= x0) & (px < x1) & (py >= y0) & (py < y1)

    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    ex, ey = x1 - x0, y1 - y0  # dilated half-extent = the full original extent
    bx0, by0, bx1, by1 = features.bbox.T
    overlaps = (
        (bx0 < np.minimum(cx + ex, w))
        & (bx1 > np.maximum(cx - ex, 0))
        & (by0 < np.minimum(cy + ey, h))
        & (by1 > np.maximum(cy - ey, 0))
    )
    surround = overlaps & ~inside

    scaled = scale_lab(features.mean_lab)
    dist = cdist(scaled, scaled)
    inside_f = inside.astype(np.float64)
    surround_f = surround.astype(np.float64)
    pair_sum = ((inside_f @ dist) * surround_f).sum(axis=1)
    pair_count = inside_f.sum(axis=1) * surround_f.sum(axis=1)
    raw = np.where(pair_count > 0, pair_sum / np.maximum(pair_count, 1.0), 0.0)
    # region means of identical pixels can differ in the last ulps; without the
    # floor a flat scene would normalize that dust into full-scale scores
    raw = np.where(raw > CONTRAST_FLOOR, raw, 0.0)
    scores = normalize_map(raw)

    areas = (boxes[:, 2] - boxes[:, 0]) * (boxes[:, 3] - boxes[:, 1])
    order = np.lexsort((-areas, -scores))[:h_count]
    return [
        WindowCandidate(int(b[0]), int(b[1]), int(b[2]), int(b[3]), float(scores[k]))
        for k, b in zip(order, boxes[order])
    ]


def pixel_objectness(
    windows: list[WindowCandidate], cbp_pixels: np.ndarray, beta: float = DEFAULT_BETA
) -> ObjectnessResult:
    """Splat each window as a Gaussian at the prior's center of mass.

    Per window: accuracy psi = (prior mass inside) / (area + beta); the window
    contributes score * psi * Gauss(sigma = half window extent) centered at the
    above-mean weighted centroid of `cbp_pixels` (image center if the prior is
    all zero). Windows sharing dimensions collapse to one accumulation.
    """
    if not windows:
        raise ValueError("no windows to accumulate")
    if beta <= 0.0:
        raise ValueError("beta must be > 0")
    v = np.asarray(cbp_pixels, dtype=np.float64)
    h, w = v.shape

    mass = np.where(v >= v.mean(), v, 0.0)
    total = mass.sum()
    if total > 0.0:
        x_o = (mass.sum(axis=0) @ np.arange(w)) / total
        y_o = (mass.sum(axis=1) @ np.arange(h)) / total
    else:
        x_o, y_o = (w - 1) / 2.0, (h - 1) / 2.0

    integral = np.zeros((h + 1, w + 1))
    integral[1:, 1:] = v.cumsum(axis=0).cumsum(axis=1)
    psi = np.empty(len(windows))
    grouped: dict[tuple[int, int], float] = {}
    for k, win in enumerate(windows):
        inside_sum = (
            integral[win.y1, win.x1]
            - integral[win.y0, win.x1]
            - integral[win.y1, win.x0]
            + integral[win.y0, win.x0]
        )
        area = (win.x1 - win.x0) * (win.y1 - win.y0)
        psi[k] = inside_sum / (area + beta)
        dims = (win.x1 - win.x0, win.y1 - win.y0)
        grouped[dims] = grouped.get(dims, 0.0) + win.score * psi[k]

    acc = np.zeros((h, w))
    for (ww, wh), coeff in grouped.items():
        gx = np.exp(-((np.arange(w) - x_o) ** 2) / (2 * (ww / 2.0) ** 2))
        gy = np.exp(-((np.arange(h) - y_o) ** 2) / (2 * (wh / 2.0) ** 2))
        acc += coeff * np.outer(gy, gx)
    return ObjectnessResult(pixel_map=normalize_map(acc), psi=psi)


def region_objectness(result: ObjectnessResult, labeling: SuperpixelLabeling) -> np.ndarray:
    """Pool the pixel objectness to per-region means (OFP)."""
    return normalize_map(region_means(labeling, result.pixel_map))


def dump_windows(path, windows: list[WindowCandidate], psi: np.ndarray) -> None:
    """Write windows as `x0 y0 x1 y1 score psi` lines."""
    with open(path, "w", encoding="ascii") as fh:
        for win, acc in zip(windows, psi):
            fh.write(f"{win.x0} {win.y0} {win.x1} {win.y1} {win.score:.6f} {acc:.6f}\n")
