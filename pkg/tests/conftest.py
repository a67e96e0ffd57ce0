import numpy as np
import pytest

from stereoproxy.synth import random_dot_scene


def make_acceptance_scene(seed, width=256, height=128):
    """Seeded scene with 1-3 occluding layers whose disparities are spaced
    at least 8 px apart, so occlusion bands are wide and unambiguous."""
    rng = np.random.default_rng(1000 + seed)
    n_layers = 1 + seed % 3
    d_bg = int(rng.integers(0, 5))
    d_cap = min(32, width // 4 - 1)
    disparities = []
    for _ in range(n_layers):
        lo = (disparities[-1] + 8) if disparities else d_bg + 8
        if lo > d_cap:
            break
        disparities.append(int(rng.integers(lo, d_cap + 1)))
    layers = []
    for d in disparities:
        x0 = int(rng.integers(width * 40 // 256, width * 180 // 256))
        y0 = int(rng.integers(height * 8 // 128, height * 80 // 128))
        x1 = int(rng.integers(x0 + width * 32 // 256,
                              min(x0 + width * 100 // 256, width * 250 // 256) + 1))
        y1 = int(rng.integers(y0 + height * 24 // 128,
                              min(y0 + height * 70 // 128, height * 124 // 128) + 1))
        layers.append(((x0, y0, x1, y1), d))
    return random_dot_scene(width, height, layers, seed=seed, background_disparity=d_bg)


def central_difference(fn, x, step=1e-4):
    """Dense central finite-difference gradient of a scalar function."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        xp = x.copy()
        xp[idx] += step
        xm = x.copy()
        xm[idx] -= step
        grad[idx] = (fn(xp) - fn(xm)) / (2 * step)
    return grad


def relative_error(a, b):
    """Elementwise |a - b| / max(|a|, |b|); zero where both are ~0."""
    denom = np.maximum(np.abs(a), np.abs(b))
    out = np.zeros_like(denom)
    mask = denom > 1e-10
    out[mask] = np.abs(a - b)[mask] / denom[mask]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
