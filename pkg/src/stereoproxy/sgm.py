"""Semi-global scanline cost aggregation and winner-takes-all extraction.

The per-path recurrence is the classic normalized form: along a scan
direction, with predecessor p' and per-path costs L,

    L(p, d) = C(p, d) + min(L(p', d),
                            L(p', d - 1) + P1,
                            L(p', d + 1) + P1,
                            min_k L(p', k) + P2) - min_k L(p', k)

with L(p, d) = C(p, d) at path starts and out-of-range d +/- 1 terms
omitted. After normalization every entry is bounded by max(C) + P2, so the
8-path integer sum fits comfortably in int32.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from stereoproxy.census import build_cost_volume, build_cost_volume_right_ref, census_transform
from stereoproxy.imagery import to_grayscale

# (dx, dy): left-to-right, right-to-left, top-down, bottom-up and diagonals.
SGM_DIRECTIONS = (
    (1, 0), (-1, 0), (0, 1), (0, -1),
    (1, 1), (-1, 1), (1, -1), (-1, -1),
)


@dataclass(frozen=True)
class SgmParams:
    """Aggregation penalties and disparity range. Defaults are in the usual
    range for 62-bit census/Hamming costs."""

    p1: int = 7
    p2: int = 86
    d_max: int = 128

    def __post_init__(self):
        if not 0 < self.p1 < self.p2:
            raise ValueError("penalties must satisfy 0 < p1 < p2")
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")


@njit(cache=True)
def _aggregate_dir(cost, dx, dy, p1, p2):
    h, w, nd = cost.shape
    out = np.empty_like(cost)
    y0, y1, ys = (0, h, 1) if dy >= 0 else (h - 1, -1, -1)
    x0, x1, xs = (0, w, 1) if dx >= 0 else (w - 1, -1, -1)
    for y in range(y0, y1, ys):
        py = y - dy
        for x in range(x0, x1, xs):
            px = x - dx
            if px < 0 or px >= w or py < 0 or py >= h:
                for d in range(nd):
                    out[y, x, d] = cost[y, x, d]
                continue
            prev_min = out[py, px, 0]
            for d in range(1, nd):
                if out[py, px, d] < prev_min:
                    prev_min = out[py, px, d]
            for d in range(nd):
                best = out[py, px, d]
                if d > 0 and out[py, px, d - 1] + p1 < best:
                    best = out[py, px, d - 1] + p1
                if d < nd - 1 and out[py, px, d + 1] + p1 < best:
                    best = out[py, px, d + 1] + p1
                if prev_min + p2 < best:
                    best = prev_min + p2
                out[y, x, d] = cost[y, x, d] + best - prev_min
    return out


def aggregate_path(volume, direction, params):
    """Aggregate matching costs along one scanline direction."""
    if tuple(direction) not in SGM_DIRECTIONS:
        raise ValueError(f"direction {direction!r} is not one of the 8 canonical directions")
    volume = np.ascontiguousarray(volume, dtype=np.int32)
    dx, dy = direction
    return _aggregate_dir(volume, dx, dy, params.p1, params.p2)


def aggregate_all(volume, params):
    """Elementwise sum of the 8 per-direction aggregations."""
    volume = np.ascontiguousarray(volume, dtype=np.int32)
    total = np.zeros_like(volume)
    for direction in SGM_DIRECTIONS:
        total += _aggregate_dir(volume, direction[0], direction[1], params.p1, params.p2)
    return total


def winner_takes_all(volume):
    """Per-pixel disparity with minimal aggregated cost; ties break to the
    smallest disparity."""
    return np.argmin(volume, axis=2).astype(np.float64)


def compute_disparity_pair(left, right, params):
    """Full SGM pipeline for both reference views: grayscale -> census ->
    cost volume -> 8-path aggregation -> WTA. Returns (d_left, d_right)."""
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    if left.shape != right.shape:
        raise ValueError("stereo pair must have equal dimensions")
    census_l = census_transform(to_grayscale(left))
    census_r = census_transform(to_grayscale(right))
    vol_l = build_cost_volume(census_l, census_r, params.d_max)
    vol_r = build_cost_volume_right_ref(census_l, census_r, params.d_max)
    d_left = winner_takes_all(aggregate_all(vol_l, params))
    d_right = winner_takes_all(aggregate_all(vol_r, params))
    return d_left, d_right
