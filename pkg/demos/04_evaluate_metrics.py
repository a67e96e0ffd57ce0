"""Narrative demo 4: depth and stereo evaluation metrics.

Converts disparities to metric depth with a pinhole calibration, runs the
seven-number depth protocol and the D1 stereo outlier rate on a distilled
label map, and writes JSON/CSV reports to demos/output/reports/.
"""

import os

import numpy as np

from stereoproxy import (
    CameraCalib,
    INVALID_DISPARITY,
    SgmParams,
    d1_metric,
    disparity_to_depth,
    distill_proxy,
    eigen_metrics,
    proxy_quality,
    random_dot_scene,
    report_to_csv,
    report_to_json,
)

OUT = os.path.join(os.path.dirname(__file__), "output", "reports")


def main():
    os.makedirs(OUT, exist_ok=True)
    calib = CameraCalib(focal_length=700.0, baseline=0.54, native_width=256)
    print("Pinhole depth from disparity: depth = f * B / d.")
    print(f"  f=700 px, B=0.54 m, d=10 px -> "
          f"{disparity_to_depth(np.array([[10.0]]), calib)[0, 0]:.1f} m\n")

    scene = random_dot_scene(256, 128, [((60, 20, 160, 90), 15),
                                        ((120, 50, 220, 110), 27)],
                             seed=19, background_disparity=5)
    proxy = distill_proxy(scene.left, scene.right, SgmParams(p1=7, p2=40, d_max=48))
    gt = scene.gt_disparity

    print("Label quality (fraction of surviving pixels within 3 px of truth):")
    print(f"  {proxy_quality(proxy, gt):.4f}\n")

    print("D1 stereo outlier rate (error > 3 px AND > 5% of ground truth),")
    print("treating the front layer as foreground:")
    pred = np.where(proxy == INVALID_DISPARITY, 0.0, proxy)
    fg = gt == 27
    d1 = d1_metric(pred, gt, fg_mask=fg)
    print(f"  d1_bg={d1.d1_bg:.2f}%  d1_fg={d1.d1_fg:.2f}%  d1_all={d1.d1_all:.2f}%")
    print("  (d1_all pools bg+fg pixels; it is not the mean of the two)\n")

    print("Seven-number depth protocol on the same prediction:")
    depth_pred = disparity_to_depth(pred, calib)
    depth_gt = disparity_to_depth(gt, calib)
    report = eigen_metrics(depth_pred, depth_gt)
    for key, value in report.as_dict().items():
        print(f"  {key:>18}: {value:.4f}" if isinstance(value, float)
              else f"  {key:>18}: {value}")

    report_to_json(report, os.path.join(OUT, "depth_report.json"))
    report_to_csv(report, os.path.join(OUT, "depth_report.csv"))
    report_to_json(d1, os.path.join(OUT, "d1_report.json"))
    print(f"\nwrote JSON/CSV reports to {OUT}")


if __name__ == "__main__":
    main()
