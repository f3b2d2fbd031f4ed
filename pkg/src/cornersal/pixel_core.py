"""Image containers, color conversion, guided filtering and PNG I/O.

Conventions used across the package:

* RGB images are uint8 arrays of shape (height, width, 3).
* Lab images are float64 arrays of shape (height, width, 3) with
  L in [0, 100] and a, b roughly in [-128, 127] (sRGB input, D65 white).
* Scalar pixel maps are float64 arrays of shape (height, width); after
  :func:`normalize_map` their values lie in [0, 1].
"""

from __future__ import annotations

import numpy as np
from PIL import Image

MIN_SIDE = 8

# sRGB -> XYZ (linear light, D65, 2 degree observer)
_RGB_TO_XYZ = np.array(
    [
        [0.412456439089692, 0.357576077643909, 0.180437483266399],
        [0.212672851405623, 0.715152155287818, 0.072174993306560],
        [0.019333895582329, 0.119192025881303, 0.950304078536368],
    ]
)
_WHITE = np.array([0.95047, 1.0, 1.08883])


def rgb_to_lab(img: np.ndarray) -> np.ndarray:
    """Convert an 8-bit sRGB image to CIELAB (D65 reference white)."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("expected an (h, w, 3) RGB array")
    srgb = img.astype(np.float64) / 255.0
    linear = np.where(srgb <= 0.04045, srgb / 12.92, ((srgb + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _RGB_TO_XYZ.T / _WHITE

    delta = 6.0 / 29.0
    f = np.where(xyz > delta**3, np.cbrt(xyz), xyz / (3.0 * delta**2) + 4.0 / 29.0)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]

    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * fy - 16.0
    lab[..., 1] = 500.0 * (fx - fy)
    lab[..., 2] = 200.0 * (fy - fz)
    return lab


def normalize_map(values: np.ndarray) -> np.ndarray:
    """Linearly rescale to [0, 1]; a constant input maps to all zeros."""
    values = np.asarray(values, dtype=np.float64)
    lo = values.min()
    hi = values.max()
    if hi - lo <= 0.0:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def _box_sum(arr: np.ndarray, radius: int) -> np.ndarray:
    """Sum over the (2r+1)-square window around each pixel, clipped at borders."""
    out = arr
    for axis in (0, 1):
        n = out.shape[axis]
        csum = np.concatenate(
            [np.zeros_like(out.take([0], axis=axis)), np.cumsum(out, axis=axis)], axis=axis
        )
        hi = np.minimum(np.arange(n) + radius + 1, n)
        lo = np.maximum(np.arange(n) - radius, 0)
        out = csum.take(hi, axis=axis) - csum.take(lo, axis=axis)
    return out


def _window_counts(height: int, width: int, radius: int) -> np.ndarray:
    return _box_sum(np.ones((height, width)), radius)


def guided_filter(guide: np.ndarray, src: np.ndarray, radius: int, eps: float) -> np.ndarray:
    """Edge-preserving smoothing of ``src`` steered by the guide's L channel.

    ``guide`` is either a Lab image, whose lightness (scaled to [0, 1]) acts
    as the single-channel guide, or an already-scalar guide of the same shape
    as ``src``. Per-window linear models are averaged over all windows
    covering a pixel.
    """
    guide = np.asarray(guide, dtype=np.float64)
    src = np.asarray(src, dtype=np.float64)
    if guide.shape[:2] != src.shape:
        raise ValueError(f"guide {guide.shape[:2]} and input {src.shape} dimensions differ")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if eps <= 0.0:
        raise ValueError("eps must be > 0")
    g = guide[..., 0] / 100.0 if guide.ndim == 3 else guide
    return _guided_filter_gray(g, src, radius, eps)


def _guided_filter_gray(g: np.ndarray, p: np.ndarray, radius: int, eps: float) -> np.ndarray:
    n = _window_counts(*g.shape, radius)
    mean_g = _box_sum(g, radius) / n
    mean_p = _box_sum(p, radius) / n
    cov_gp = _box_sum(g * p, radius) / n - mean_g * mean_p
    var_g = _box_sum(g * g, radius) / n - mean_g * mean_g

    a = cov_gp / (var_g + eps)
    b = mean_p - a * mean_g

    mean_a = _box_sum(a, radius) / n
    mean_b = _box_sum(b, radius) / n
    return mean_a * g + mean_b


def default_guided_radius(height: int, width: int) -> int:
    """Refinement radius scaled to the image: round(0.04 * min side), at least 1."""
    return max(1, int(round(0.04 * min(height, width))))


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Map a [0, 1] float map to 8-bit gray, rounding halves up."""
    q = np.floor(np.asarray(values, dtype=np.float64) * 255.0 + 0.5)
    return np.clip(q, 0, 255).astype(np.uint8)


def read_image(path) -> np.ndarray:
    """Read an 8-bit PNG (or other Pillow-readable file) as an RGB array."""
    try:
        with Image.open(path) as im:
            if im.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise ValueError(f"{path}: unsupported bit depth (mode {im.mode})")
            rgb = np.asarray(im.convert("RGB"))
    except (OSError, SyntaxError) as exc:
        raise ValueError(f"{path}: unreadable image ({exc})") from exc
    if rgb.shape[0] < MIN_SIDE or rgb.shape[1] < MIN_SIDE:
        raise ValueError(f"{path}: image must be at least {MIN_SIDE}x{MIN_SIDE}")
    return rgb


def write_map(path, values: np.ndarray) -> None:
    """Write a [0, 1] scalar map as an 8-bit grayscale PNG."""
    Image.fromarray(quantize_u8(values), mode="L").save(path, format="PNG")


def write_image(path, rgb: np.ndarray) -> None:
    Image.fromarray(np.asarray(rgb, dtype=np.uint8), mode="RGB").save(path, format="PNG")


def read_mask(path) -> np.ndarray:
    """Read a binary ground-truth mask (gray > 127 counts as foreground)."""
    with Image.open(path) as im:
        gray = np.asarray(im.convert("L"))
    return gray > 127


def write_labels(path, labels: np.ndarray) -> None:
    """Debug dump of a region labeling as 16-bit grayscale PNG."""
    arr = np.asarray(labels)
    if arr.max() > 0xFFFF:
        raise ValueError("more than 65535 regions cannot be stored as 16-bit PNG")
    Image.fromarray(arr.astype(np.uint16)).save(path, format="PNG")
