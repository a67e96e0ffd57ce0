"""Deterministic synthetic random-dot stereo scenes with exact ground truth.

Each layer (background plus front-to-back rectangles) gets its own binary
random-dot texture, lightly smoothed with a 3x3 box so every census window
sees structure. The right view is built by exact integer shifting of the same
textures back-to-front, so non-occluded pixels match photometrically to the
bit. Occlusion is resolved per row with a disparity z-buffer, which also
marks left-border pixels that fall outside the right view.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class SyntheticScene:
    left: np.ndarray
    right: np.ndarray
    gt_disparity: np.ndarray
    occlusion_mask: np.ndarray
    seed: int


def _smooth3(img):
    h, w = img.shape
    padded = np.pad(img, 1, mode="edge")
    acc = np.zeros((h, w))
    for di in range(3):
        for dj in range(3):
            acc += padded[di : di + h, dj : dj + w]
    return acc / 9.0


def _texture(rng, height, width, density, smooth):
    dots = (rng.random((height, width)) < density).astype(np.float64)
    return _smooth3(dots) if smooth else dots


def random_dot_scene(width, height, layers, seed, background_disparity=2,
                     density=0.5, smooth=True, noise_sigma=0.0):
    """Build a seeded random-dot stereo scene.

    layers is a back-to-front list of ((x0, y0, x1, y1), disparity) with
    integer disparities in [0, width / 4); rectangles are given in left-view
    coordinates.
    """
    disparities = [background_disparity] + [d for _, d in layers]
    for d in disparities:
        if int(d) != d or not 0 <= d < width / 4:
            raise ValueError("disparities must be integers in [0, width / 4)")
    for (x0, y0, x1, y1), _ in layers:
        if not (0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height):
            raise ValueError(f"invalid rectangle bounds {(x0, y0, x1, y1)}")

    rng = np.random.default_rng(seed)
    d_bg = int(background_disparity)
    tex_bg = _texture(rng, height, width + d_bg, density, smooth)

    left = tex_bg[:, :width].copy()
    right = tex_bg[:, d_bg : d_bg + width].copy()
    gt = np.full((height, width), float(d_bg))

    for (x0, y0, x1, y1), d in layers:
        d = int(d)
        tex = _texture(rng, height, width + d, density, smooth)
        left[y0:y1, x0:x1] = tex[y0:y1, x0:x1]
        gt[y0:y1, x0:x1] = float(d)
        rx0, rx1 = max(x0 - d, 0), max(x1 - d, 0)
        right[y0:y1, rx0:rx1] = tex[y0:y1, rx0 + d : rx1 + d]

    # z-buffer visibility: a left pixel is occluded iff a nearer left pixel
    # of the same row lands on the same right-view column, or iff it falls
    # left of the right image.
    xr = (np.arange(width)[None, :] - gt).astype(np.int64)
    in_view = xr >= 0
    zbuf = np.full((height, width), -1.0)
    flat_idx = (np.arange(height)[:, None] * width + np.clip(xr, 0, width - 1))[in_view]
    np.maximum.at(zbuf.reshape(-1), flat_idx, gt[in_view])
    matched = np.take_along_axis(zbuf, np.clip(xr, 0, width - 1), axis=1)
    occlusion = ~in_view | (gt < matched)

    if noise_sigma > 0:
        left = np.clip(left + rng.normal(0.0, noise_sigma, left.shape), 0.0, 1.0)
        right = np.clip(right + rng.normal(0.0, noise_sigma, right.shape), 0.0, 1.0)

    return SyntheticScene(left=left, right=right, gt_disparity=gt,
                          occlusion_mask=occlusion, seed=seed)


def check_photometric_consistency(scene):
    """Max |left(x, y) - right(x - gt, y)| over non-occluded pixels; exactly
    0 for noiseless scenes."""
    h, w = scene.gt_disparity.shape
    xr = (np.arange(w)[None, :] - scene.gt_disparity).astype(np.int64)
    vis = ~scene.occlusion_mask
    rows = np.broadcast_to(np.arange(h)[:, None], (h, w))
    diffs = np.abs(scene.left[vis] - scene.right[rows[vis], xr[vis]])
    return float(diffs.max()) if diffs.size else 0.0
