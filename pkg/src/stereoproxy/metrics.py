"""Depth and stereo evaluation metrics.

eigen_metrics implements the standard seven-number monocular protocol
(Abs Rel, Sq Rel, RMSE, RMSE log, three delta thresholds) with an 80 m cap;
d1_metric implements the KITTI 2015 stereo outlier rule (error > 3 px AND
> 5% of ground truth). Reports serialize to JSON/CSV with 6 decimals.
"""

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from stereoproxy.imagery import INVALID_DISPARITY

MIN_EVAL_DEPTH = 1e-3  # meters; floor applied to predictions before logs


@dataclass
class EvalReport:
    abs_rel: float
    sq_rel: float
    rmse: float
    rmse_log: float
    delta1: float
    delta2: float
    delta3: float
    valid_pixel_count: int

    _FIELDS = ("abs_rel", "sq_rel", "rmse", "rmse_log", "delta1", "delta2", "delta3",
               "valid_pixel_count")

    def as_dict(self):
        return {k: getattr(self, k) for k in self._FIELDS}


@dataclass
class D1Report:
    d1_bg: float
    d1_fg: float
    d1_all: float
    bg_pixel_count: int
    fg_pixel_count: int

    _FIELDS = ("d1_bg", "d1_fg", "d1_all", "bg_pixel_count", "fg_pixel_count")

    def as_dict(self):
        return {k: getattr(self, k) for k in self._FIELDS}


def disparity_to_depth(disp, calib):
    """depth = focal * baseline / disparity; -1 and 0 disparities produce
    invalid (-1) depth."""
    disp = np.asarray(disp, dtype=np.float64)
    valid = disp > 0
    depth = np.full_like(disp, INVALID_DISPARITY)
    depth[valid] = calib.focal_length * calib.baseline / disp[valid]
    return depth


def depth_to_disparity(depth, calib):
    """Algebraic inverse of disparity_to_depth for valid (positive) depths."""
    depth = np.asarray(depth, dtype=np.float64)
    valid = depth > 0
    disp = np.full_like(depth, INVALID_DISPARITY)
    disp[valid] = calib.focal_length * calib.baseline / depth[valid]
    return disp


def garg_crop_mask(height, width):
    """Standard evaluation crop used with the Eigen split."""
    mask = np.zeros((height, width), dtype=bool)
    y0, y1 = int(0.40810811 * height), int(0.99189189 * height)
    x0, x1 = int(0.03594771 * width), int(0.96405229 * width)
    mask[y0:y1, x0:x1] = True
    return mask


def eigen_metrics(pred_depth, gt_depth, cap=80.0, crop_mask=None, median_scale=False):
    """Seven-number depth evaluation over pixels with valid ground truth in
    (0, cap]; predictions are clamped to [MIN_EVAL_DEPTH, cap]."""
    pred = np.asarray(pred_depth, dtype=np.float64)
    gt = np.asarray(gt_depth, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError("prediction and ground truth must have equal dimensions")
    mask = (gt > 0) & (gt <= cap)
    if crop_mask is not None:
        mask &= crop_mask
    if not mask.any():
        raise ValueError("no valid ground-truth pixels")
    p = pred[mask]
    g = gt[mask]
    if median_scale:
        p = p * np.median(g) / np.median(p)
    p = np.clip(p, MIN_EVAL_DEPTH, cap)
    err = p - g
    ratio = np.maximum(p / g, g / p)
    return EvalReport(
        abs_rel=float(np.mean(np.abs(err) / g)),
        sq_rel=float(np.mean(err ** 2 / g)),
        rmse=float(np.sqrt(np.mean(err ** 2))),
        rmse_log=float(np.sqrt(np.mean((np.log(p) - np.log(g)) ** 2))),
        delta1=float(np.mean(ratio < 1.25)),
        delta2=float(np.mean(ratio < 1.25 ** 2)),
        delta3=float(np.mean(ratio < 1.25 ** 3)),
        valid_pixel_count=int(mask.sum()),
    )


def d1_metric(pred_disp, gt_disp, fg_mask=None):
    """KITTI 2015 D1 percentages. A pixel is an outlier iff its error exceeds
    both 3 px and 5% of the ground-truth disparity; d1_all pools bg and fg
    pixels rather than averaging the two percentages."""
    pred = np.asarray(pred_disp, dtype=np.float64)
    gt = np.asarray(gt_disp, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError("prediction and ground truth must have equal dimensions")
    domain = gt > 0
    if not domain.any():
        raise ValueError("empty evaluation domain")
    err = np.abs(pred - gt)
    outlier = (err > 3.0) & (err > 0.05 * gt)
    if fg_mask is None:
        fg = np.zeros_like(domain)
    else:
        fg = np.asarray(fg_mask, dtype=bool)
    bg = domain & ~fg
    fg = domain & fg
    n_bg, n_fg = int(bg.sum()), int(fg.sum())

    def pct(region, count):
        return float(100.0 * outlier[region].sum() / count) if count else 0.0

    return D1Report(
        d1_bg=pct(bg, n_bg),
        d1_fg=pct(fg, n_fg),
        d1_all=pct(domain, n_bg + n_fg),
        bg_pixel_count=n_bg,
        fg_pixel_count=n_fg,
    )


def proxy_quality(proxy, gt, threshold=3.0):
    """Fraction of pixels valid in both maps with |proxy - gt| < threshold."""
    proxy = np.asarray(proxy, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if proxy.shape != gt.shape:
        raise ValueError("maps must have equal dimensions")
    mask = (proxy != INVALID_DISPARITY) & (gt != INVALID_DISPARITY) & (gt > 0)
    if not mask.any():
        raise ValueError("no jointly valid pixels")
    return float(np.mean(np.abs(proxy[mask] - gt[mask]) < threshold))


def report_to_json(report, path=None):
    payload = {k: round(v, 6) if isinstance(v, float) else v for k, v in report.as_dict().items()}
    text = json.dumps(payload, indent=2) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    return text


def report_to_csv(report, path=None):
    d = report.as_dict()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(d.keys())
    writer.writerow([f"{v:.6f}" if isinstance(v, float) else v for v in d.values()])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    return text
