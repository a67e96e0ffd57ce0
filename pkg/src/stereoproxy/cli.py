"""Batch orchestration CLI.

Subcommands:
  distill  - proxy-label generation over filename-matched stereo directories
  eval     - eigen / d1 / proxy evaluation of prediction directories
  loss     - loss breakdown for one image pair + multi-scale disparity files
  synth    - materialize seeded synthetic scenes to disk

Configuration is a key=value file (# comments allowed) whose entries are
overridden by command-line flags. All outputs are deterministic for a fixed
config regardless of thread count; wall-clock timings therefore go to stdout
only, never into report files.
"""

import argparse
import concurrent.futures
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import zoom

from stereoproxy.consistency import ConsistencyParams, distill_proxy
from stereoproxy.imagery import (
    CameraCalib,
    INVALID_DISPARITY,
    disparity_format_for,
    read_disparity,
    read_image,
    write_disparity,
    write_image,
)
from stereoproxy.losses import LossWeights, loss_ref
from stereoproxy.metrics import (
    d1_metric,
    disparity_to_depth,
    eigen_metrics,
    garg_crop_mask,
    proxy_quality,
    report_to_csv,
)
from stereoproxy.sgm import SgmParams
from stereoproxy.synth import check_photometric_consistency, random_dot_scene

SUMMARY_SCHEMA_VERSION = 1

IMAGE_EXTS = (".png", ".pgm", ".ppm")
DISPARITY_EXTS = (".png", ".pfm")


@dataclass
class PipelineConfig:
    """All knobs in one place. Defaults carry the published values:
    epsilon=1, ssim_alpha=0.85, berhu_alpha=0.2, alpha_ap=1, alpha_ds=0.1,
    alpha_ps=1, n_i=4, n_r=3; P1/P2/d_max are implementation defaults."""

    p1: int = 7
    p2: int = 86
    d_max: int = 128
    epsilon: float = 1.0
    target_width: int = 0          # 0 disables the target_width/W rescaling
    format: str = "kitti_png16"
    cap: float = 80.0
    crop: bool = True
    median_scaling: bool = False
    fail_fast: bool = True
    threads: int = 1
    seed: int = 0
    alpha_ap: float = 1.0
    alpha_ds: float = 0.1
    alpha_ps: float = 1.0
    ssim_alpha: float = 0.85
    berhu_alpha: float = 0.2
    n_i: int = 4
    n_r: int = 3

    def sgm_params(self):
        return SgmParams(p1=self.p1, p2=self.p2, d_max=self.d_max)

    def consistency_params(self):
        return ConsistencyParams(epsilon=self.epsilon)

    def loss_weights(self, n_r=None):
        return LossWeights(alpha_ap=self.alpha_ap, alpha_ds=self.alpha_ds,
                           alpha_ps=self.alpha_ps, ssim_alpha=self.ssim_alpha,
                           berhu_alpha=self.berhu_alpha, n_i=self.n_i,
                           n_r=self.n_r if n_r is None else n_r)

    def validate(self):
        self.sgm_params()
        self.consistency_params()
        self.loss_weights()
        if self.format not in ("kitti_png16", "pfm"):
            raise ValueError(f"unknown label format {self.format!r}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.target_width < 0:
            raise ValueError("target_width must be >= 0")
        return self


def load_config(path=None, overrides=None):
    cfg = PipelineConfig()
    if path:
        for lineno, raw in enumerate(open(path, encoding="utf-8"), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            _set_config(cfg, key, value)
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


def _set_config(cfg, key, value):
    if not hasattr(cfg, key):
        raise ValueError(f"unknown config key {key!r}")
    current = getattr(cfg, key)
    if isinstance(current, bool):
        setattr(cfg, key, value.lower() in ("1", "true", "yes", "on"))
    elif isinstance(current, int):
        setattr(cfg, key, int(value))
    elif isinstance(current, float):
        setattr(cfg, key, float(value))
    else:
        setattr(cfg, key, value)


def _index_by_stem(directory, exts):
    files = {}
    for name in sorted(os.listdir(directory)):
        stem, ext = os.path.splitext(name)
        if ext.lower() in exts:
            files[stem] = os.path.join(directory, name)
    return files


def _match_dirs(dir_a, dir_b, exts):
    a = _index_by_stem(dir_a, exts)
    b = _index_by_stem(dir_b, exts)
    common = sorted(set(a) & set(b))
    unmatched = sorted(set(a) ^ set(b))
    return [(stem, a[stem], b[stem]) for stem in common], unmatched


# -- distill -----------------------------------------------------------------

def _distill_one(stem, left_path, right_path, out_dir, cfg):
    left = read_image(left_path)
    right = read_image(right_path)
    scale = 1.0
    if cfg.target_width:
        scale = cfg.target_width / left.shape[1]
    proxy = distill_proxy(left, right, cfg.sgm_params(), cfg.consistency_params(), scale)
    ext = ".png" if cfg.format == "kitti_png16" else ".pfm"
    out_path = os.path.join(out_dir, stem + ext)
    write_disparity(proxy, out_path, cfg.format)
    valid_fraction = float(np.mean(proxy != INVALID_DISPARITY))
    return {"name": stem, "file": os.path.basename(out_path),
            "valid_fraction": round(valid_fraction, 6)}


def cmd_distill(args):
    cfg = load_config(args.config, _overrides(args))
    os.makedirs(args.out_dir, exist_ok=True)
    pairs, unmatched = _match_dirs(args.left_dir, args.right_dir, IMAGE_EXTS)
    if unmatched and cfg.fail_fast:
        print(f"error: unmatched filenames: {', '.join(unmatched)}", file=sys.stderr)
        return 1
    entries, failures = [], []
    start = time.perf_counter()
    with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        futures = {pool.submit(_distill_one, stem, lp, rp, args.out_dir, cfg): stem
                   for stem, lp, rp in pairs}
        for future in concurrent.futures.as_completed(futures):
            stem = futures[future]
            try:
                entries.append(future.result())
            except Exception as exc:  # noqa: BLE001 - reported per file
                if cfg.fail_fast:
                    print(f"error: {stem}: {exc}", file=sys.stderr)
                    return 1
                failures.append({"name": stem, "error": str(exc)})
    elapsed = time.perf_counter() - start
    entries.sort(key=lambda e: e["name"])
    failures.sort(key=lambda e: e["name"])
    summary = {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "config": asdict(cfg),
        "num_pairs": len(entries),
        "entries": entries,
        "skipped": failures + [{"name": s, "error": "unmatched"} for s in unmatched],
    }
    with open(os.path.join(args.out_dir, "summary.json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    print(f"distilled {len(entries)} pairs in {elapsed:.2f}s "
          f"({len(failures)} failed, {len(unmatched)} unmatched)")
    return 0 if not failures else 1


# -- eval --------------------------------------------------------------------

def _load_disparity(path):
    return read_disparity(path, disparity_format_for(path))


def cmd_eval(args):
    cfg = load_config(args.config, _overrides(args))
    pairs, unmatched = _match_dirs(args.pred_dir, args.gt_dir, DISPARITY_EXTS)
    if not pairs:
        print("error: no filename-matched prediction/ground-truth pairs", file=sys.stderr)
        return 1
    if unmatched and cfg.fail_fast:
        print(f"error: unmatched filenames: {', '.join(unmatched)}", file=sys.stderr)
        return 1
    if args.mode == "eigen" and (args.focal is None or args.baseline is None):
        print("error: eigen mode requires --focal and --baseline", file=sys.stderr)
        return 1

    per_image = {}
    pooled = {"outliers": 0, "domain": 0, "good": 0, "valid": 0}
    reports = []
    for stem, pred_path, gt_path in pairs:
        pred = _load_disparity(pred_path)
        gt = _load_disparity(gt_path)
        if args.mode == "eigen":
            calib = CameraCalib(args.focal, args.baseline, pred.shape[1])
            pred_depth = disparity_to_depth(pred, calib)
            gt_depth = disparity_to_depth(gt, calib)
            crop = garg_crop_mask(*pred.shape) if cfg.crop else None
            report = eigen_metrics(pred_depth, gt_depth, cap=cfg.cap,
                                   crop_mask=crop, median_scale=cfg.median_scaling)
            reports.append(report)
            per_image[stem] = report.as_dict()
        elif args.mode == "d1":
            report = d1_metric(pred, gt)
            per_image[stem] = report.as_dict()
            err = np.abs(pred - gt)
            domain = gt > 0
            pooled["outliers"] += int(((err > 3.0) & (err > 0.05 * gt) & domain).sum())
            pooled["domain"] += int(domain.sum())
        else:  # proxy
            frac = proxy_quality(pred, gt, threshold=args.threshold)
            mask = (pred != INVALID_DISPARITY) & (gt > 0)
            per_image[stem] = {"good_fraction": round(frac, 6), "valid_pixel_count": int(mask.sum())}
            pooled["good"] += int((np.abs(pred - gt)[mask] < args.threshold).sum())
            pooled["valid"] += int(mask.sum())

    if args.mode == "eigen":
        keys = ("abs_rel", "sq_rel", "rmse", "rmse_log", "delta1", "delta2", "delta3")
        aggregate = {k: round(float(np.mean([getattr(r, k) for r in reports])), 6) for k in keys}
        aggregate["valid_pixel_count"] = int(sum(r.valid_pixel_count for r in reports))
    elif args.mode == "d1":
        aggregate = {
            "d1_all": round(100.0 * pooled["outliers"] / pooled["domain"], 6),
            "pixel_count": pooled["domain"],
        }
    else:
        aggregate = {
            "good_fraction": round(pooled["good"] / pooled["valid"], 6) if pooled["valid"] else 0.0,
            "valid_pixel_count": pooled["valid"],
        }

    result = {"schema_version": SUMMARY_SCHEMA_VERSION, "mode": args.mode,
              "per_image": per_image, "aggregate": aggregate}
    text = json.dumps(result, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    if args.csv and args.mode in ("eigen", "d1") and reports:
        report_to_csv(reports[0], args.csv)
    print(text, end="")
    return 0


# -- loss --------------------------------------------------------------------

def _load_scale(path, shape):
    disp = _load_disparity(path)
    if disp.shape != shape:
        factors = (shape[0] / disp.shape[0], shape[1] / disp.shape[1])
        disp = zoom(disp, factors, order=1, grid_mode=True, mode="nearest")
    return disp


def cmd_loss(args):
    cfg = load_config(args.config, _overrides(args))
    left = read_image(args.left)
    right = read_image(args.right)
    proxy = _load_disparity(args.proxy)
    shape = left.shape[:2]
    scales = [_load_scale(p, shape) for p in args.disp]
    weights = cfg.loss_weights(n_r=len(scales))
    breakdown = loss_ref(scales, left, right, proxy, weights,
                         with_grad=args.grad_out is not None)
    result = {"schema_version": SUMMARY_SCHEMA_VERSION,
              "weights": {"alpha_ap": weights.alpha_ap, "alpha_ds": weights.alpha_ds,
                          "alpha_ps": weights.alpha_ps, "ssim_alpha": weights.ssim_alpha,
                          "berhu_alpha": weights.berhu_alpha, "scales": len(scales)},
              "loss": breakdown.as_dict()}
    text = json.dumps(result, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    if args.grad_out:
        np.savez(args.grad_out, **{f"grad_scale_{i}": g
                                   for i, g in enumerate(breakdown.grad_left)})
    print(text, end="")
    return 0


# -- synth -------------------------------------------------------------------

def cmd_synth(args):
    cfg = load_config(args.config, _overrides(args))
    os.makedirs(args.out_dir, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)
    for i in range(args.num_scenes):
        layers = []
        for _ in range(args.layers):
            x0 = int(rng.integers(0, args.width - 32))
            y0 = int(rng.integers(0, args.height - 16))
            x1 = int(rng.integers(x0 + 16, min(x0 + args.width // 3, args.width) + 1))
            y1 = int(rng.integers(y0 + 8, min(y0 + args.height // 2, args.height) + 1))
            d = int(rng.integers(4, args.width // 4))
            layers.append(((x0, y0, x1, y1), d))
        layers.sort(key=lambda layer: layer[1])  # back-to-front
        scene = random_dot_scene(args.width, args.height, layers, seed=cfg.seed + i,
                                 background_disparity=int(rng.integers(0, 4)))
        stem = f"scene_{i:03d}"
        write_image(scene.left, os.path.join(args.out_dir, stem + "_left.png"))
        write_image(scene.right, os.path.join(args.out_dir, stem + "_right.png"))
        write_disparity(scene.gt_disparity, os.path.join(args.out_dir, stem + "_gt.pfm"), "pfm")
        write_image(scene.occlusion_mask.astype(np.float64),
                    os.path.join(args.out_dir, stem + "_occ.png"))
        residual = check_photometric_consistency(scene)
        print(f"{stem}: layers={len(layers)} photometric_residual={residual:.1e}")
    return 0


# -- argument plumbing -------------------------------------------------------

def _overrides(args):
    keys = ("p1", "p2", "d_max", "epsilon", "target_width", "format", "cap",
            "crop", "median_scaling", "fail_fast", "threads", "seed",
            "alpha_ap", "alpha_ds", "alpha_ps", "ssim_alpha", "berhu_alpha")
    return {k: getattr(args, k, None) for k in keys}


def _add_common(parser):
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="stereoproxy")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distill", help="generate proxy disparity labels")
    p.add_argument("--left-dir", required=True)
    p.add_argument("--right-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--p1", type=int, default=None)
    p.add_argument("--p2", type=int, default=None)
    p.add_argument("--d-max", dest="d_max", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--target-width", dest="target_width", type=int, default=None)
    p.add_argument("--format", choices=("kitti_png16", "pfm"), default=None)
    p.add_argument("--skip-errors", dest="fail_fast", action="store_false", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("eval", help="evaluate prediction directories")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--mode", choices=("eigen", "d1", "proxy"), required=True)
    p.add_argument("--focal", type=float, help="focal length in pixels (eigen mode)")
    p.add_argument("--baseline", type=float, help="baseline in meters (eigen mode)")
    p.add_argument("--cap", type=float, default=None)
    p.add_argument("--threshold", type=float, default=3.0, help="proxy-mode error threshold")
    p.add_argument("--no-crop", dest="crop", action="store_false", default=None)
    p.add_argument("--median-scaling", dest="median_scaling", action="store_true", default=None)
    p.add_argument("--skip-errors", dest="fail_fast", action="store_false", default=None)
    p.add_argument("--out", help="write JSON report here")
    p.add_argument("--csv", help="write first per-image CSV report here")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("loss", help="evaluate the loss breakdown")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--proxy", required=True)
    p.add_argument("--disp", nargs="+", required=True,
                   help="disparity scale files, fine to coarse")
    p.add_argument("--alpha-ap", dest="alpha_ap", type=float, default=None)
    p.add_argument("--alpha-ds", dest="alpha_ds", type=float, default=None)
    p.add_argument("--alpha-ps", dest="alpha_ps", type=float, default=None)
    p.add_argument("--ssim-alpha", dest="ssim_alpha", type=float, default=None)
    p.add_argument("--berhu-alpha", dest="berhu_alpha", type=float, default=None)
    p.add_argument("--out", help="write JSON breakdown here")
    p.add_argument("--grad-out", help="write per-scale gradients (npz) here")
    _add_common(p)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("synth", help="write synthetic scenes to disk")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--num-scenes", type=int, default=3)
    p.add_argument("--layers", type=int, default=2)
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
