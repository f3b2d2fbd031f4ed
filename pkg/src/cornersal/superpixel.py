"""SLIC over-segmentation and per-region feature extraction.

The segmenter is the classic local k-means in (L, a, b, x, y) space with
cluster seeds on a regular grid. Each pixel only competes among the 3x3
grid neighborhood of its cell, which keeps every iteration a handful of
vectorized passes and makes the result fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

CORNER_NONE = 0
CORNER_LU = 1
CORNER_RU = 2
CORNER_LD = 3
CORNER_RD = 4
CORNERS = (CORNER_LU, CORNER_RU, CORNER_LD, CORNER_RD)
CORNER_NAMES = {CORNER_LU: "LU", CORNER_RU: "RU", CORNER_LD: "LD", CORNER_RD: "RD"}

DEFAULT_COMPACTNESS = 10.0
DEFAULT_ITERS = 10

_CROSS = ndimage.generate_binary_structure(2, 1)  # 4-connectivity


@dataclass
class SuperpixelLabeling:
    labels: np.ndarray  # (h, w) int32 region index per pixel
    region_count: int

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass
class SuperpixelFeatures:
    mean_lab: np.ndarray  # (n, 3) mean CIELAB color per region
    centroid: np.ndarray  # (n, 2) mean (x, y) scaled to [0, 1]^2
    size: np.ndarray  # (n,) pixel counts
    neighbors: np.ndarray  # (n, n) bool, 2-hop adjacency, symmetric, no self
    corner: np.ndarray  # (n,) CORNER_* code per region
    bbox: np.ndarray  # (n, 4) half-open pixel bounds x0, y0, x1, y1


def slic_segment(
    lab: np.ndarray,
    n_target: int,
    compactness: float = DEFAULT_COMPACTNESS,
    max_iters: int = DEFAULT_ITERS,
) -> SuperpixelLabeling:
    """Segment a Lab image into roughly ``n_target`` compact superpixels."""
    lab = np.asarray(lab, dtype=np.float64)
    h, w = lab.shape[:2]
    if not 16 <= n_target <= h * w // 16:
        raise ValueError(f"n_target {n_target} outside [16, {h * w // 16}] for {w}x{h} image")
    if compactness <= 0.0:
        raise ValueError("compactness must be > 0")

    step = np.sqrt(h * w / n_target)
    nx = max(1, int(round(w / step)))
    ny = max(1, int(round(h / step)))
    k_count = nx * ny

    # seeds at grid-cell centers
    cx = (np.tile(np.arange(nx), ny) + 0.5) * (w / nx)
    cy = (np.repeat(np.arange(ny), nx) + 0.5) * (h / ny)
    seed_px = np.minimum(cx.astype(np.int64), w - 1)
    seed_py = np.minimum(cy.astype(np.int64), h - 1)
    c_lab = lab[seed_py, seed_px, :].copy()

    ys, xs = np.mgrid[0:h, 0:w]
    cell_x = (xs * nx) // w
    cell_y = (ys * ny) // h
    spatial_w = (compactness / step) ** 2

    labels = np.zeros((h, w), dtype=np.int32)
    for _ in range(max_iters):
        best = np.full((h, w), np.inf)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                gx = np.clip(cell_x + dx, 0, nx - 1)
                gy = np.clip(cell_y + dy, 0, ny - 1)
                k = gy * nx + gx
                dist = (
                    (lab[..., 0] - c_lab[k, 0]) ** 2
                    + (lab[..., 1] - c_lab[k, 1]) ** 2
                    + (lab[..., 2] - c_lab[k, 2]) ** 2
                    + spatial_w * ((xs - cx[k]) ** 2 + (ys - cy[k]) ** 2)
                )
                closer = dist < best
                best[closer] = dist[closer]
                labels[closer] = k[closer]

        flat = labels.ravel()
        counts = np.bincount(flat, minlength=k_count)
        occupied = counts > 0
        safe = np.maximum(counts, 1)
        new_cx = np.bincount(flat, weights=xs.ravel(), minlength=k_count) / safe
        new_cy = np.bincount(flat, weights=ys.ravel(), minlength=k_count) / safe
        cx = np.where(occupied, new_cx, cx)
        cy = np.where(occupied, new_cy, cy)
        for c in range(3):
            new_c = np.bincount(flat, weights=lab[..., c].ravel(), minlength=k_count) / safe
            c_lab[:, c] = np.where(occupied, new_c, c_lab[:, c])

    labels = _enforce_connectivity(labels, k_count)
    return SuperpixelLabeling(labels=labels, region_count=int(labels.max()) + 1)


def _enforce_connectivity(labels: np.ndarray, k_count: int) -> np.ndarray:
    """Reassign orphan components to the largest adjacent region, then relabel."""
    h, w = labels.shape
    settled = np.zeros((h, w), dtype=bool)
    orphans = []  # (region, ys, xs) per non-largest component

    for k, sl in enumerate(ndimage.find_objects(labels + 1, max_label=k_count)):
        if sl is None:
            continue
        mask = labels[sl] == k
        comp, n_comp = ndimage.label(mask, structure=_CROSS)
        if n_comp == 1:
            settled[sl] |= mask
            continue
        sizes = np.bincount(comp.ravel())[1:]
        largest = int(np.argmax(sizes)) + 1
        settled[sl] |= comp == largest
        y0, x0 = sl[0].start, sl[1].start
        for c in range(1, n_comp + 1):
            if c == largest:
                continue
            cy, cx = np.nonzero(comp == c)
            orphans.append((k, cy + y0, cx + x0))

    region_size = np.bincount(labels.ravel(), minlength=k_count)
    while orphans:
        deferred = []
        for k, ys, xs in orphans:
            cand = []
            for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                ny = ys + dy
                nx_ = xs + dx
                ok = (ny >= 0) & (ny < h) & (nx_ >= 0) & (nx_ < w)
                ok[ok] &= settled[ny[ok], nx_[ok]]
                cand.append(labels[ny[ok], nx_[ok]])
            cand = np.concatenate(cand) if cand else np.empty(0, dtype=labels.dtype)
            if cand.size == 0:
                deferred.append((k, ys, xs))
                continue
            neighbors = np.unique(cand)
            target = int(neighbors[np.argmax(region_size[neighbors])])
            labels[ys, xs] = target
            settled[ys, xs] = True
            region_size[target] += ys.size
            region_size[k] -= ys.size
        if len(deferred) == len(orphans):  # cannot happen on a connected grid
            raise RuntimeError("connectivity pass failed to resolve orphan components")
        orphans = deferred

    _, compact = np.unique(labels, return_inverse=True)
    return compact.reshape(h, w).astype(np.int32)


def extract_features(
    labeling: SuperpixelLabeling, lab: np.ndarray, corner_fraction: float = 0.15
) -> SuperpixelFeatures:
    """Per-region mean color, normalized centroid, size, 2-hop neighbors and
    corner membership (side of each corner square: ceil(fraction * min side))."""
    lab = np.asarray(lab, dtype=np.float64)
    h, w = labeling.labels.shape
    if lab.shape[:2] != (h, w):
        raise ValueError(f"labeling {(h, w)} and image {lab.shape[:2]} dimensions differ")
    if not 0.0 < corner_fraction < 0.5:
        raise ValueError("corner_fraction must lie in (0, 0.5)")

    labels = labeling.labels
    n = labeling.region_count
    flat = labels.ravel()
    size = np.bincount(flat, minlength=n)

    mean_lab = np.stack(
        [np.bincount(flat, weights=lab[..., c].ravel(), minlength=n) / size for c in range(3)],
        axis=1,
    )
    ys, xs = np.mgrid[0:h, 0:w]
    mx = np.bincount(flat, weights=xs.ravel(), minlength=n) / size
    my = np.bincount(flat, weights=ys.ravel(), minlength=n) / size
    centroid = np.stack([mx / max(w - 1, 1), my / max(h - 1, 1)], axis=1)

    adj = np.zeros((n, n), dtype=bool)
    for a, b in ((labels[:, :-1], labels[:, 1:]), (labels[:-1, :], labels[1:, :])):
        edge = a != b
        adj[a[edge], b[edge]] = True
        adj[b[edge], a[edge]] = True
    two_hop = adj | (adj @ adj)
    np.fill_diagonal(two_hop, False)

    side = int(np.ceil(corner_fraction * min(w, h)))
    squares = {
        CORNER_LU: (slice(0, side), slice(0, side)),
        CORNER_RU: (slice(0, side), slice(w - side, w)),
        CORNER_LD: (slice(h - side, h), slice(0, side)),
        CORNER_RD: (slice(h - side, h), slice(w - side, w)),
    }
    counts = np.zeros((n, len(CORNERS)), dtype=np.int64)
    for col, code in enumerate(CORNERS):
        counts[:, col] = np.bincount(labels[squares[code]].ravel(), minlength=n)
    corner = np.zeros(n, dtype=np.int8)
    touched = counts.any(axis=1)
    # ties: most pixels wins, then LU < RU < LD < RD (argmax keeps the first max)
    corner[touched] = np.argmax(counts[touched], axis=1) + 1

    bbox = np.empty((n, 4), dtype=np.int64)
    for i, (sy, sx) in enumerate(ndimage.find_objects(labels + 1)):
        bbox[i] = (sx.start, sy.start, sx.stop, sy.stop)

    return SuperpixelFeatures(
        mean_lab=mean_lab, centroid=centroid, size=size, neighbors=two_hop, corner=corner, bbox=bbox
    )


def region_map(labeling: SuperpixelLabeling, values: np.ndarray) -> np.ndarray:
    """Render per-region values to a pixel map."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (labeling.region_count,):
        raise ValueError("one value per region required")
    return values[labeling.labels]


def region_means(labeling: SuperpixelLabeling, pixel_map: np.ndarray) -> np.ndarray:
    """Average a pixel map over each region."""
    if pixel_map.shape != labeling.labels.shape:
        raise ValueError("pixel map and labeling dimensions differ")
    flat = labeling.labels.ravel()
    size = np.bincount(flat, minlength=labeling.region_count)
    sums = np.bincount(flat, weights=pixel_map.ravel(), minlength=labeling.region_count)
    return sums / size
