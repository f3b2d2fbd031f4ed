"""Region affinity graph: color/spatial weights and the row-stochastic walk."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .superpixel import CORNER_NONE, SuperpixelFeatures

DEFAULT_SIGMA_COLOR = 0.1
DEFAULT_SIGMA_SPATIAL = 0.25


@dataclass
class AffinityGraph:
    weights: np.ndarray  # (n, n) symmetric, zero diagonal, entries in [0, 1]
    degrees: np.ndarray  # (n,) row sums of weights
    transition: np.ndarray  # (n, n) degrees^-1 * weights, rows sum to 1
    corner_codes: np.ndarray  # (n,) CORNER_* membership per region

    @property
    def region_count(self) -> int:
        return self.weights.shape[0]

    @property
    def corner_mask(self) -> np.ndarray:
        """Pooled background set: regions touching any corner square."""
        return self.corner_codes != CORNER_NONE


def scale_lab(lab_values: np.ndarray) -> np.ndarray:
    """Rescale CIELAB channels to [0, 1]: L/100, (a+128)/255, (b+128)/255."""
    lab_values = np.asarray(lab_values, dtype=np.float64)
    out = np.empty_like(lab_values)
    out[..., 0] = lab_values[..., 0] / 100.0
    out[..., 1] = (lab_values[..., 1] + 128.0) / 255.0
    out[..., 2] = (lab_values[..., 2] + 128.0) / 255.0
    return out


def row_normalize(weights: np.ndarray) -> np.ndarray:
    """Divide each row by its sum, turning weights into transition probabilities."""
    degrees = weights.sum(axis=1)
    if np.any(degrees <= 0.0):
        raise ValueError("cannot row-normalize: zero-degree row")
    return weights / degrees[:, None]


def build_graph(
    features: SuperpixelFeatures,
    sigma_color: float = DEFAULT_SIGMA_COLOR,
    sigma_spatial: float = DEFAULT_SIGMA_SPATIAL,
    squared_distance: bool = False,
) -> AffinityGraph:
    """Build the sparse affinity pattern and its row-normalized transition matrix.

    Edges join 2-hop spatial neighbors plus every pair of corner regions,
    which ties the four image corners into one background clique. Weights
    multiply a color kernel exp(-|ci - cj| / (2 sigma_color^2)) with the
    analogous kernel on normalized centroids.
    """
    if sigma_color <= 0.0 or sigma_spatial <= 0.0:
        raise ValueError("kernel bandwidths must be > 0")
    metric = "sqeuclidean" if squared_distance else "euclidean"
    scaled = scale_lab(features.mean_lab)
    color = np.exp(-cdist(scaled, scaled, metric) / (2 * sigma_color**2))
    spatial = np.exp(-cdist(features.centroid, features.centroid, metric) / (2 * sigma_spatial**2))

    corner_mask = features.corner != CORNER_NONE
    pattern = features.neighbors | (corner_mask[:, None] & corner_mask[None, :])
    np.fill_diagonal(pattern, False)

    weights = np.where(pattern, color * spatial, 0.0)
    if weights.sum(axis=1).min() <= 0.0:
        raise ValueError("affinity graph has an isolated region")
    return AffinityGraph(
        weights=weights,
        degrees=weights.sum(axis=1),
        transition=row_normalize(weights),
        corner_codes=features.corner.copy(),
    )


def dump_weights(path, graph: AffinityGraph) -> None:
    """Write nonzero weights as `i j w_ij` triplet lines."""
    rows, cols = np.nonzero(graph.weights)
    with open(path, "w", encoding="ascii") as fh:
        for i, j in zip(rows, cols):
            fh.write(f"{i} {j} {graph.weights[i, j]:.12g}\n")
