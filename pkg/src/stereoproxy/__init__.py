"""Classical-stereo proxy-label distillation and depth-evaluation toolkit.

Images are numpy float64 arrays of shape (H, W) or (H, W, 3) with intensities
in [0, 1]. Disparity maps are float64 arrays of shape (H, W) whose values are
either -1 (invalid) or non-negative disparities in pixels. The origin is the
top-left corner, x grows rightward, y downward.
"""

from stereoproxy.imagery import (
    CameraCalib,
    INVALID_DISPARITY,
    read_disparity,
    read_image,
    to_grayscale,
    write_disparity,
    write_image,
)
from stereoproxy.census import build_cost_volume, build_cost_volume_right_ref, census_transform
from stereoproxy.sgm import SgmParams, aggregate_all, aggregate_path, compute_disparity_pair, winner_takes_all
from stereoproxy.consistency import ConsistencyParams, distill_proxy, lr_check, scale_disparity
from stereoproxy.losses import (
    LossBreakdown,
    LossWeights,
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
from stereoproxy.metrics import (
    D1Report,
    EvalReport,
    d1_metric,
    depth_to_disparity,
    disparity_to_depth,
    eigen_metrics,
    garg_crop_mask,
    proxy_quality,
    report_to_csv,
    report_to_json,
)
from stereoproxy.synth import SyntheticScene, check_photometric_consistency, random_dot_scene

__version__ = "0.1.0"
