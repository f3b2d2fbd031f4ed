"""Color conversion, normalization, guided filtering, and image I/O."""

from __future__ import annotations

import numpy as np
import pytest
from PIL import Image

from cornersal.pixel_core import (
    default_guided_radius,
    guided_filter,
    normalize_map,
    quantize_u8,
    read_image,
    read_mask,
    rgb_to_lab,
    write_image,
    write_labels,
    write_map,
)

# sRGB (D65) reference values, computed independently and frozen.
LAB_PALETTE = [
    ((255, 0, 0), (53.2406, 80.0923, 67.2028)),
    ((0, 255, 0), (87.7351, -86.1830, 83.1797)),
    ((0, 0, 255), (32.2957, 79.1856, -107.8573)),
    ((255, 255, 0), (97.1395, -21.5547, 94.4781)),
    ((128, 64, 200), (41.8848, 53.5213, -60.3550)),
    ((255, 255, 255), (100.0, -0.0025, 0.0047)),
    ((0, 0, 0), (0.0, 0.0, 0.0)),
]


def test_rgb_to_lab_palette():
    rgb = np.array([[c for c, _ in LAB_PALETTE]], dtype=np.uint8)
    lab = rgb_to_lab(rgb)
    for k, (_, expected) in enumerate(LAB_PALETTE):
        assert np.abs(lab[0, k] - np.array(expected)).max() <= 0.01


def test_rgb_to_lab_shape_and_dtype():
    lab = rgb_to_lab(np.zeros((4, 5, 3), dtype=np.uint8))
    assert lab.shape == (4, 5, 3)
    assert lab.dtype == np.float64


def test_normalize_map_examples():
    assert np.allclose(normalize_map(np.array([2.0, 4.0, 6.0])), [0.0, 0.5, 1.0])
    assert np.array_equal(normalize_map(np.array([5.0, 5.0, 5.0])), [0.0, 0.0, 0.0])
    assert np.allclose(normalize_map(np.array([-1.0, 0.0, 3.0])), [0.0, 0.25, 1.0])


def test_normalize_map_idempotent():
    rng = np.random.default_rng(0)
    once = normalize_map(rng.random((6, 7)))
    assert np.allclose(normalize_map(once), once, atol=1e-15)
    assert once.min() == 0.0 and once.max() == 1.0


def test_quantize_u8_rounding():
    q = quantize_u8(np.array([0.0, 0.5, 1.0, -0.2, 1.7]))
    assert q.dtype == np.uint8
    assert q.tolist() == [0, 128, 255, 0, 255]


def _brute_window_mean(arr: np.ndarray, radius: int) -> np.ndarray:
    h, w = arr.shape
    out = np.empty_like(arr)
    for y in range(h):
        for x in range(w):
            window = arr[max(0, y - radius) : y + radius + 1, max(0, x - radius) : x + radius + 1]
            out[y, x] = window.mean()
    return out


def test_guided_filter_constant_source():
    rng = np.random.default_rng(1)
    guide = rng.random((12, 12))
    out = guided_filter(guide, np.full((12, 12), 0.4), radius=2, eps=1e-3)
    assert np.abs(out - 0.4).max() <= 1e-12


def test_guided_filter_large_eps_is_double_box_mean():
    rng = np.random.default_rng(2)
    guide = rng.random((32, 32))
    src = rng.random((32, 32))
    out = guided_filter(guide, src, radius=3, eps=1e6)
    expected = _brute_window_mean(_brute_window_mean(src, 3), 3)
    assert np.abs(out - expected).max() <= 1e-6


def test_guided_filter_bounded_when_self_guided():
    # Each window's fit a*g + b is then a convex blend of the center value and
    # the window mean, so smoothing a map by itself can never leave its range.
    # (An unrelated guide can extrapolate past the range; that is expected.)
    rng = np.random.default_rng(3)
    for _ in range(25):
        src = rng.random((16, 16))
        out = guided_filter(src, src, radius=int(rng.integers(1, 4)), eps=1e-3)
        assert out.min() >= src.min() - 1e-9
        assert out.max() <= src.max() + 1e-9


def test_guided_filter_accepts_lab_guide():
    rng = np.random.default_rng(4)
    img = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
    lab = rgb_to_lab(img)
    src = rng.random((16, 16))
    via_lab = guided_filter(lab, src, radius=2, eps=1e-3)
    via_gray = guided_filter(lab[..., 0] / 100.0, src, radius=2, eps=1e-3)
    assert np.array_equal(via_lab, via_gray)


def test_guided_filter_rejects_bad_arguments():
    src = np.zeros((8, 8))
    with pytest.raises(ValueError):
        guided_filter(np.zeros((8, 9)), src, radius=1, eps=1e-3)
    with pytest.raises(ValueError):
        guided_filter(src, src, radius=0, eps=1e-3)
    with pytest.raises(ValueError):
        guided_filter(src, src, radius=1, eps=0.0)


def test_default_guided_radius():
    assert default_guided_radius(180, 240) == 7  # round(0.04 * 180)
    assert default_guided_radius(10, 10) == 1  # floor clamps to 1


def test_image_round_trip_bytes(tmp_path):
    rgb = np.array(
        [[[10, 20, 30], [40, 50, 60]], [[70, 80, 90], [100, 110, 120]], [[0, 255, 7], [9, 8, 254]]],
        dtype=np.uint8,
    )
    path = tmp_path / "tiny.png"
    # minimum accepted side is 8, so tile the 3x2 block into an 9x8 canvas
    canvas = np.tile(rgb, (3, 4, 1))
    write_image(path, canvas)
    assert np.array_equal(read_image(path), canvas)


def test_write_map_quantizes(tmp_path):
    values = np.linspace(0.0, 1.0, 64).reshape(8, 8)
    path = tmp_path / "map.png"
    write_map(path, values)
    stored = np.asarray(Image.open(path))
    assert stored.dtype == np.uint8
    assert np.array_equal(stored, quantize_u8(values))


def test_read_mask_threshold(tmp_path):
    gray = np.zeros((8, 8), dtype=np.uint8)
    gray[:4] = 127  # not foreground
    gray[4:] = 128  # foreground
    path = tmp_path / "mask.png"
    Image.fromarray(gray, mode="L").save(path)
    mask = read_mask(path)
    assert mask.dtype == bool
    assert not mask[:4].any() and mask[4:].all()


def test_read_image_rejects_bad_inputs(tmp_path):
    garbage = tmp_path / "garbage.png"
    garbage.write_bytes(b"not a png at all")
    with pytest.raises(ValueError):
        read_image(garbage)
    small = tmp_path / "small.png"
    write_image(small, np.zeros((8, 8, 3), dtype=np.uint8))
    # shrink below the minimum side directly through PIL
    Image.open(small).crop((0, 0, 4, 8)).save(tmp_path / "narrow.png")
    with pytest.raises(ValueError):
        read_image(tmp_path / "narrow.png")
    with pytest.raises(ValueError):
        read_image(tmp_path / "missing.png")


def test_read_image_rejects_16bit(tmp_path):
    path = tmp_path / "deep.png"
    write_labels(path, np.zeros((8, 8), dtype=np.int64))
    with pytest.raises(ValueError):
        read_image(path)


def test_write_labels_round_trip(tmp_path):
    labels = np.arange(64, dtype=np.int64).reshape(8, 8)
    path = tmp_path / "labels.png"
    write_labels(path, labels)
    assert np.array_equal(np.asarray(Image.open(path), dtype=np.int64), labels)
    with pytest.raises(ValueError):
        write_labels(tmp_path / "too_many.png", np.array([[0, 70000]]))
