"""Quadratic energy refinement of prior maps and foreground fusion.

The energy charges each region for leaving 1 in proportion to its prior
confidence, for leaving 0 where the binarized prior says background, and for
disagreeing with its graph neighbors. The stationary point solves a sparse
SPD linear system.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import spsolve

from .affinity import AffinityGraph
from .pixel_core import normalize_map

XI_CEILING = 1.0 - 1e-3  # keeps -log(1 - xi) finite
RESIDUAL_TOL = 1e-10
DEFAULT_ETA = 6.0


def binarize_adaptive(values: np.ndarray) -> np.ndarray:
    """Indicator of values reaching the map mean (1 = foreground)."""
    values = np.asarray(values, dtype=np.float64)
    return (values >= values.mean()).astype(np.float64)


def foreground_weights(xi: np.ndarray, literal_log_sign: bool = False) -> np.ndarray:
    """Per-region anchor strength alpha = -log(1 - xi), xi clipped below 1.

    `literal_log_sign` keeps the raw log(1 - xi) (negative) for side-by-side
    comparison; the default flips it so cost grows with confidence.
    """
    xi = np.clip(np.asarray(xi, dtype=np.float64), 0.0, XI_CEILING)
    alpha = np.log1p(-xi)
    return alpha if literal_log_sign else -alpha


def solve_stationary(alpha: np.ndarray, t: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Solve (Diag(alpha) + Diag(1 - t) + 2L) s = alpha with L = D - W."""
    alpha = np.asarray(alpha, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    laplacian = np.diag(weights.sum(axis=1)) - weights
    system = np.diag(alpha + (1.0 - t)) + 2.0 * laplacian
    s = spsolve(csr_matrix(system), alpha)
    misfit = np.linalg.norm(system @ s - alpha)
    scale = np.linalg.norm(alpha)
    ratio = misfit / scale if scale > 0.0 else misfit
    if not ratio <= RESIDUAL_TOL:  # NaN-safe: a singular solve must raise, not return NaNs
        raise RuntimeError(f"energy solve residual {misfit:.3e} exceeds tolerance")
    return s


def optimize_energy(
    xi: np.ndarray,
    t: np.ndarray,
    graph: AffinityGraph,
    literal_log_sign: bool = False,
) -> np.ndarray:
    """Refine a normalized prior map against its binarization and the graph."""
    xi = np.asarray(xi, dtype=np.float64)
    alpha = foreground_weights(xi, literal_log_sign)
    if not alpha.any() and np.all(np.asarray(t, dtype=np.float64) == 1.0):
        warnings.warn("energy system is singular (no anchors); prior returned unchanged")
        return xi.copy()
    return normalize_map(solve_stationary(alpha, t, graph.weights))


def energy_value(s: np.ndarray, alpha: np.ndarray, t: np.ndarray, weights: np.ndarray) -> float:
    """Evaluate the objective the stationary solve minimizes."""
    s = np.asarray(s, dtype=np.float64)
    unary = alpha @ (s - 1.0) ** 2 + (1.0 - t) @ s**2
    smooth = (weights * (s[:, None] - s[None, :]) ** 2).sum()  # ordered pairs
    return float(unary + smooth)


def energy_gradient(
    s: np.ndarray, alpha: np.ndarray, t: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """Analytic gradient of energy_value."""
    s = np.asarray(s, dtype=np.float64)
    lap_s = weights.sum(axis=1) * s - weights @ s
    return 2.0 * alpha * (s - 1.0) + 2.0 * (1.0 - t) * s + 4.0 * lap_s


def fuse_slp(cbp_opt: np.ndarray, ofp_opt: np.ndarray, eta: float = DEFAULT_ETA) -> np.ndarray:
    """Gate the corner prior by a saturating response to the objectness prior."""
    if eta <= 0.0:
        raise ValueError("eta must be > 0")
    cbp_opt = np.asarray(cbp_opt, dtype=np.float64)
    ofp_opt = np.asarray(ofp_opt, dtype=np.float64)
    return normalize_map(cbp_opt * -np.expm1(-eta * ofp_opt))
