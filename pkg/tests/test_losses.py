import numpy as np
import pytest

from conftest import central_difference, relative_error
from stereoproxy import losses as L
from stereoproxy.losses import (
    LossWeights,
    berhu,
    loss_ap,
    loss_ds,
    loss_init,
    loss_ps,
    loss_ref,
    loss_total,
    post_process,
    ssim,
    warp_horizontal,
)


# -- warp --------------------------------------------------------------------

def test_warp_zero_disparity_identity(rng):
    src = rng.random((6, 9))
    assert np.array_equal(warp_horizontal(src, np.zeros((6, 9)), -1), src)


def test_warp_constant_shift_on_ramp():
    ramp = np.tile(np.linspace(0, 1, 10), (4, 1))
    out = warp_horizontal(ramp, np.ones((4, 10)), +1)
    # linear ramp sampled one pixel to the right, interior columns
    assert np.allclose(out[:, :-1], ramp[:, 1:])


def test_warp_single_pixel_two_tap_oracle(rng):
    src = rng.random((5, 8))
    disp = rng.random((5, 8)) * 3
    out = warp_horizontal(src, disp, -1)
    y, x = 2, 6
    xs = x - disp[y, x]
    x0 = int(np.floor(xs))
    w = xs - x0
    expected = (1 - w) * src[y, max(x0, 0)] + w * src[y, min(max(x0 + 1, 0), 7)]
    assert out[y, x] == pytest.approx(expected, abs=1e-12)


def test_warp_rejects_invalid_entries():
    disp = np.zeros((3, 3))
    disp[1, 1] = -1
    with pytest.raises(ValueError):
        warp_horizontal(np.zeros((3, 3)), disp, -1)


# -- ssim --------------------------------------------------------------------

def test_ssim_identity(rng):
    img = rng.random((8, 8))
    assert np.allclose(ssim(img, img), 1.0, atol=1e-6)


def test_ssim_constant_closed_form():
    c1, c2 = 0.25, 0.6
    s = ssim(np.full((7, 9), c1), np.full((7, 9), c2))
    expected = (2 * c1 * c2 + L.SSIM_C1) / (c1 * c1 + c2 * c2 + L.SSIM_C1)
    assert np.allclose(s, expected, atol=1e-12)


def test_ssim_against_windowed_oracle(rng):
    a = rng.random((10, 11))
    b = rng.random((10, 11))
    s = ssim(a, b)
    ap = np.pad(a, 1, mode="edge")
    bp = np.pad(b, 1, mode="edge")
    for y, x in [(0, 0), (4, 5), (9, 10), (2, 8)]:
        wa = ap[y : y + 3, x : x + 3]
        wb = bp[y : y + 3, x : x + 3]
        mx, my = wa.mean(), wb.mean()
        sx = (wa * wa).mean() - mx * mx
        sy = (wb * wb).mean() - my * my
        sxy = (wa * wb).mean() - mx * my
        expected = ((2 * mx * my + L.SSIM_C1) * (2 * sxy + L.SSIM_C2)) / (
            (mx * mx + my * my + L.SSIM_C1) * (sx + sy + L.SSIM_C2)
        )
        assert s[y, x] == pytest.approx(expected, abs=1e-6)


def test_ssim_range(rng):
    s = ssim(rng.random((12, 12)), rng.random((12, 12)))
    assert s.min() >= -1 - 1e-12 and s.max() <= 1 + 1e-12


# -- loss_ap -----------------------------------------------------------------

def test_loss_ap_zero_on_identity(rng):
    img = rng.random((9, 9))
    assert loss_ap(img, img) == pytest.approx(0.0, abs=1e-9)


def test_loss_ap_pure_l1():
    img = np.full((6, 6), 0.4)
    recon = np.full((6, 6), 0.5)
    w = LossWeights(ssim_alpha=0.0)
    assert loss_ap(img, recon, w) == pytest.approx(0.1, abs=1e-12)


def test_loss_ap_gradient_fd(rng):
    img = rng.random((8, 8))
    recon = rng.random((8, 8))
    _, grad = loss_ap(img, recon, with_grad=True)
    fd = central_difference(lambda y: loss_ap(img, y), recon)
    mask = np.abs(img - recon) > 1e-3  # away from the L1 kink
    assert relative_error(grad, fd)[mask].max() < 1e-3


def test_loss_ap_gradient_fd_rgb(rng):
    img = rng.random((6, 6, 3))
    recon = rng.random((6, 6, 3))
    _, grad = loss_ap(img, recon, with_grad=True)
    fd = central_difference(lambda y: loss_ap(img, y), recon)
    mask = np.abs(img - recon) > 1e-3
    assert relative_error(grad, fd)[mask].max() < 1e-3


# -- loss_ds -----------------------------------------------------------------

def test_loss_ds_zero_on_constant(rng):
    img = rng.random((7, 7))
    assert loss_ds(np.full((7, 7), 3.0), img) == pytest.approx(0.0, abs=1e-12)


def test_loss_ds_unit_ramp_on_constant_image():
    disp = np.tile(np.arange(10.0), (6, 1))
    assert loss_ds(disp, np.full((6, 10), 0.5)) == pytest.approx(1.0, abs=1e-12)


def test_loss_ds_gradient_fd(rng):
    disp = rng.random((8, 8)) * 4
    img = rng.random((8, 8))
    _, grad = loss_ds(disp, img, with_grad=True)
    fd = central_difference(lambda d: loss_ds(d, img), disp)
    assert relative_error(grad, fd).max() < 1e-3


def test_loss_ds_rejects_invalid():
    disp = np.zeros((3, 3))
    disp[0, 0] = -1
    with pytest.raises(ValueError):
        loss_ds(disp, np.zeros((3, 3)))


# -- loss_ps -----------------------------------------------------------------

def test_berhu_two_pixel_worked_example():
    disp = np.array([[1.0, 2.0]])
    proxy = np.array([[0.0, 0.0]])
    # c = 0.2 * 2 = 0.4; berHu(1) = (1 - 0.16) / 0.8 = 1.05;
    # berHu(2) = (4 - 0.16) / 0.8 = 4.8; mean = 2.925
    assert loss_ps(disp, proxy) == pytest.approx(2.925, abs=1e-12)


def test_loss_ps_zero_on_equal(rng):
    proxy = rng.random((6, 6)) * 10
    assert loss_ps(proxy.copy(), proxy) == pytest.approx(0.0, abs=1e-12)


def test_loss_ps_ignores_invalid_proxy(rng):
    proxy = rng.random((6, 6)) * 5
    proxy[2, :] = -1
    disp = proxy + 0.5
    base = loss_ps(disp, proxy)
    perturbed = disp.copy()
    perturbed[2, :] = 1234.0  # only masked pixels change
    assert loss_ps(perturbed, proxy) == pytest.approx(base, abs=1e-12)


def test_loss_ps_all_invalid_raises():
    with pytest.raises(ValueError):
        loss_ps(np.zeros((2, 2)), np.full((2, 2), -1.0))


def test_loss_ps_gradient_fd_frozen_c(rng):
    proxy = rng.random((8, 8)) * 5
    proxy[rng.random((8, 8)) < 0.2] = -1
    disp = rng.random((8, 8)) * 5
    mask = proxy != -1
    c = 0.2 * np.abs((disp - proxy)[mask]).max()
    _, grad = loss_ps(disp, proxy, with_grad=True, c=c)
    fd = central_difference(lambda d: loss_ps(d, proxy, c=c), disp)
    r = np.abs(disp - proxy)
    keep = mask & (np.abs(r - c) > 1e-3) & (r > 1e-3)
    assert relative_error(grad, fd)[keep].max() < 1e-3


def test_berhu_c_zero_degenerate():
    assert np.all(berhu(np.zeros(4), 0.0) == 0.0)


# -- compositions ------------------------------------------------------------

def _random_instance(rng, h=8, w=10, n=2):
    il = rng.random((h, w))
    ir = rng.random((h, w))
    pl = rng.random((h, w)) * 3
    pr = rng.random((h, w)) * 3
    dls = [rng.random((h, w)) * 3 + 0.2 for _ in range(n)]
    drs = [rng.random((h, w)) * 3 + 0.2 for _ in range(n)]
    return il, ir, pl, pr, dls, drs


def test_loss_init_zero_weights(rng):
    il, ir, pl, pr, dls, drs = _random_instance(rng)
    w = LossWeights(alpha_ap=0, alpha_ds=0, alpha_ps=0, n_i=2)
    assert loss_init(dls, drs, il, ir, pl, pr, w).total == 0.0


def test_loss_init_total_is_weighted_sum(rng):
    il, ir, pl, pr, dls, drs = _random_instance(rng)
    w = LossWeights(n_i=2)
    bd = loss_init(dls, drs, il, ir, pl, pr, w)
    expected = w.alpha_ap * bd.ap + w.alpha_ds * bd.ds + w.alpha_ps * bd.ps
    assert bd.total == pytest.approx(expected, rel=1e-12)


def test_loss_init_scale_count_mismatch(rng):
    il, ir, pl, pr, dls, drs = _random_instance(rng, n=2)
    with pytest.raises(ValueError):
        loss_init(dls, drs, il, ir, pl, pr, LossWeights(n_i=4))


def test_loss_init_perfect_disparity_beats_zero_disparity():
    rng = np.random.default_rng(21)
    wide = (rng.random((24, 80)) < 0.5).astype(np.float64)
    shift = 4
    left = wide[:, :64]
    right = wide[:, shift:64 + shift]
    gt = np.full(left.shape, float(shift))
    w = LossWeights(n_i=1)
    perfect = loss_init([gt], [gt], left, right, gt, gt, w)
    zero = loss_init([np.zeros_like(gt)], [np.zeros_like(gt)], left, right, gt, gt, w)
    assert perfect.ps == pytest.approx(0.0, abs=1e-12)
    assert perfect.ap < zero.ap


def test_loss_ref_left_only(rng):
    il, ir, pl, _, dls, _ = _random_instance(rng, n=3)
    w = LossWeights(n_r=3)
    bd = loss_ref(dls, il, ir, pl, w)
    assert bd.total == pytest.approx(
        w.alpha_ap * bd.ap + w.alpha_ds * bd.ds + w.alpha_ps * bd.ps, rel=1e-12
    )
    assert bd.grad_right == []


def test_loss_total_composition(rng):
    il, ir, pl, pr, dls, drs = _random_instance(rng)
    wi = LossWeights(n_i=2, n_r=2)
    init = loss_init(dls, drs, il, ir, pl, pr, wi)
    ref = loss_ref(dls, il, ir, pl, wi)
    assert loss_total(init, ref) == pytest.approx(init.total + ref.total, rel=1e-12)


def test_multiscale_gradient_chains_through_warp(rng):
    il, ir, pl, pr, dls, drs = _random_instance(rng, h=6, w=8, n=1)
    w = LossWeights(n_i=1)
    bd = loss_init(dls, drs, il, ir, pl, pr, w, with_grad=True)
    grad = bd.grad_left[0]
    step = 1e-5
    errors = []
    mask = pl != -1
    c = w.berhu_alpha * np.abs((dls[0] - pl)[mask]).max()
    for y in range(6):
        for x in range(8):
            # skip non-smooth points: warp integer crossings and berHu kink
            xs = x - dls[0][y, x]
            if abs(xs - round(xs)) < 1e-2:
                continue
            if abs(abs(dls[0][y, x] - pl[y, x]) - c) < 1e-2:
                continue
            if abs(dls[0][y, x] - pl[y, x]) > c - 1e-2:
                continue  # near the adaptive-c maximum chain
            dp = [dls[0].copy()]
            dp[0][y, x] += step
            dm = [dls[0].copy()]
            dm[0][y, x] -= step
            fp = loss_init(dp, drs, il, ir, pl, pr, w).total
            fm = loss_init(dm, drs, il, ir, pl, pr, w).total
            fd = (fp - fm) / (2 * step)
            denom = max(abs(fd), abs(grad[y, x]), 1e-10)
            errors.append(abs(fd - grad[y, x]) / denom)
    assert np.median(errors) < 1e-4


# -- post-processing ---------------------------------------------------------

def test_post_process_identical_maps(rng):
    d = rng.random((6, 40)) * 10
    assert np.allclose(post_process(d, d[:, ::-1]), d)


def test_post_process_middle_average():
    d = np.full((4, 100), 2.0)
    d_flipped = np.full((4, 100), 4.0)
    out = post_process(d, d_flipped)
    assert out[0, 50] == pytest.approx(3.0)


def test_post_process_left_column_uses_mirrored_map(rng):
    d = rng.random((3, 60))
    d_flipped = rng.random((3, 60))
    out = post_process(d, d_flipped)
    assert np.allclose(out[:, 0], d_flipped[:, -1])
    assert np.allclose(out[:, -1], d[:, -1])
