"""Left-right consistency filtering and resolution-change disparity scaling.

A left-view pixel p survives iff |D_L(p) - D_R(p - D_L(p))| <= epsilon; the
lookup column is rounded to nearest and clamped to the image. Everything else
is set to -1. Scaling multiplies valid values only, so the check must run
before any 1280/W rescaling (the check lives in the geometry both maps were
computed in).
"""

from dataclasses import dataclass

import numpy as np

from stereoproxy.imagery import INVALID_DISPARITY
from stereoproxy.sgm import compute_disparity_pair


@dataclass(frozen=True)
class ConsistencyParams:
    epsilon: float = 1.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


def lr_check(d_left, d_right, params=ConsistencyParams()):
    """Invalidate left-map pixels that disagree with the right map."""
    d_left = np.asarray(d_left, dtype=np.float64)
    d_right = np.asarray(d_right, dtype=np.float64)
    if d_left.shape != d_right.shape:
        raise ValueError("disparity maps must have equal dimensions")
    h, w = d_left.shape
    xs = np.arange(w)[None, :]
    lookup = np.clip(np.round(xs - d_left).astype(np.int64), 0, w - 1)
    matched = np.take_along_axis(d_right, lookup, axis=1)
    keep = (
        (d_left != INVALID_DISPARITY)
        & (matched != INVALID_DISPARITY)
        & (np.abs(d_left - matched) <= params.epsilon)
    )
    out = np.where(keep, d_left, INVALID_DISPARITY)
    return out


def scale_disparity(disp, factor):
    """Multiply valid disparities by a resolution factor (1280/W when native
    labels feed a 1280-wide pipeline); -1 is preserved."""
    if factor <= 0:
        raise ValueError("scale factor must be > 0")
    disp = np.asarray(disp, dtype=np.float64)
    invalid = disp == INVALID_DISPARITY
    return np.where(invalid, INVALID_DISPARITY, disp * factor)


def distill_proxy(left, right, sgm_params, cons_params=ConsistencyParams(), scale=1.0):
    """End-to-end proxy-label generation: SGM pair -> left-right check ->
    resolution scaling. Returns the training-ready left-aligned label map."""
    d_left, d_right = compute_disparity_pair(left, right, sgm_params)
    filtered = lr_check(d_left, d_right, cons_params)
    return scale_disparity(filtered, scale)
