"""Census transform and Hamming-distance cost volumes.

Descriptors are 62-bit strings packed into uint64: one bit per neighbor of a
9 (wide) x 7 (tall) window centered on the pixel, center excluded, set iff the
neighbor is strictly darker than the center. Out-of-image neighbors are read
through edge replication, and out-of-range match columns are clamped.
"""

import numpy as np

CENSUS_WINDOW = (9, 7)  # width, height
CENSUS_BITS = CENSUS_WINDOW[0] * CENSUS_WINDOW[1] - 1  # 62


def census_transform(img):
    """Per-pixel 62-bit census descriptor of a grayscale image."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("census transform expects a 1-channel image")
    if img.size == 0:
        raise ValueError("image must be at least 1x1")
    wx, wy = CENSUS_WINDOW
    rx, ry = wx // 2, wy // 2
    padded = np.pad(img, ((ry, ry), (rx, rx)), mode="edge")
    h, w = img.shape
    desc = np.zeros((h, w), dtype=np.uint64)
    bit = 0
    for dy in range(-ry, ry + 1):
        for dx in range(-rx, rx + 1):
            if dx == 0 and dy == 0:
                continue
            neighbor = padded[ry + dy : ry + dy + h, rx + dx : rx + dx + w]
            desc |= (neighbor < img).astype(np.uint64) << np.uint64(bit)
            bit += 1
    return desc


def _shifted_columns(field, shift):
    """Columns x + shift of a descriptor field, clamped to the image."""
    w = field.shape[1]
    cols = np.clip(np.arange(w) + shift, 0, w - 1)
    return field[:, cols]


def build_cost_volume(left, right, d_max):
    """Left-reference cost volume: cost(y, x, d) is the Hamming distance
    between left(y, x) and right(y, x - d), with x - d clamped to column 0."""
    left = np.asarray(left, dtype=np.uint64)
    right = np.asarray(right, dtype=np.uint64)
    if left.shape != right.shape:
        raise ValueError("census fields must have equal dimensions")
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    h, w = left.shape
    costs = np.empty((h, w, d_max), dtype=np.int32)
    for d in range(d_max):
        costs[:, :, d] = np.bitwise_count(left ^ _shifted_columns(right, -d))
    return costs


def build_cost_volume_right_ref(left, right, d_max):
    """Right-reference cost volume: cost(y, x, d) is the Hamming distance
    between right(y, x) and left(y, x + d), with x + d clamped to the last
    column."""
    left = np.asarray(left, dtype=np.uint64)
    right = np.asarray(right, dtype=np.uint64)
    if left.shape != right.shape:
        raise ValueError("census fields must have equal dimensions")
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    h, w = left.shape
    costs = np.empty((h, w, d_max), dtype=np.int32)
    for d in range(d_max):
        costs[:, :, d] = np.bitwise_count(right ^ _shifted_columns(left, d))
    return costs
