"""Raster types, color conversion and bit-exact file I/O.

Supported image formats: 8-bit PNG (grayscale or RGB) and binary PGM/PPM.
Supported disparity formats: KITTI 16-bit PNG (stored value = round(256*d),
0 encodes invalid) and PFM (little-endian float32, -1 preserved as-is).
"""

import os
import re
import struct
from dataclasses import dataclass

import numpy as np
from PIL import Image as PILImage

INVALID_DISPARITY = -1.0

# Largest disparity representable in the KITTI 16-bit encoding (65535 / 256).
_KITTI_MAX_DISPARITY = 65535 / 256.0

GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class CameraCalib:
    """Pinhole calibration used for disparity <-> depth conversion.

    native_width is the width (pixels) at which disparities were computed;
    it drives the 1280/W rescaling of proxy labels.
    """

    focal_length: float  # pixels
    baseline: float      # meters
    native_width: int    # pixels

    def __post_init__(self):
        if self.focal_length <= 0 or self.baseline <= 0 or self.native_width <= 0:
            raise ValueError("calibration fields must be strictly positive")


def validate_image(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[2] not in (1, 3)):
        raise ValueError("image must be (H, W), (H, W, 1) or (H, W, 3)")
    if not np.all(np.isfinite(img)) or img.min() < 0 or img.max() > 1:
        raise ValueError("intensities must be finite and in [0, 1]")
    return img


def validate_disparity(disp, d_max=None):
    disp = np.asarray(disp, dtype=np.float64)
    if disp.ndim != 2:
        raise ValueError("disparity map must be 2-D")
    invalid = disp == INVALID_DISPARITY
    valid = disp[~invalid]
    if valid.size and (not np.all(np.isfinite(valid)) or valid.min() < 0):
        raise ValueError("disparities must be -1 or finite and >= 0")
    if d_max is not None and valid.size and valid.max() >= d_max:
        raise ValueError("valid disparity exceeds configured maximum")
    return disp


def to_grayscale(img):
    """Collapse a 3-channel image to a single channel with 0.299/0.587/0.114
    weights. 1-channel input is returned unchanged."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] == 1:
        return img[:, :, 0]
    if img.ndim == 3 and img.shape[2] == 3:
        return img @ GRAY_WEIGHTS
    raise ValueError("image must have 1 or 3 channels")


def _read_pnm(path):
    with open(path, "rb") as f:
        data = f.read()
    m = re.match(rb"(P[56])\s+(?:#[^\n]*\n\s*)*(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None:
        raise ValueError(f"malformed PGM/PPM header in {path}")
    magic, width, height, maxval = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4))
    if maxval != 255:
        raise ValueError(f"unsupported bit depth (maxval={maxval}) in {path}")
    channels = 3 if magic == b"P6" else 1
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height * channels, offset=m.end())
    if raster.size != width * height * channels:
        raise ValueError(f"truncated raster in {path}")
    img = raster.reshape(height, width, channels)
    return img[:, :, 0] if channels == 1 else img


def _write_pnm(arr8, path):
    if arr8.ndim == 2:
        magic = b"P5"
    else:
        magic = b"P6"
    header = b"%s\n%d %d\n255\n" % (magic, arr8.shape[1], arr8.shape[0])
    with open(path, "wb") as f:
        f.write(header)
        f.write(arr8.tobytes())


def read_image(path):
    """Read an 8-bit PNG/PGM/PPM image, mapping intensities by v / 255."""
    ext = os.path.splitext(path)[1].lower()
    if ext in (".pgm", ".ppm"):
        arr = _read_pnm(path)
    else:
        with PILImage.open(path) as im:
            if im.mode not in ("L", "RGB"):
                raise ValueError(f"unsupported image mode {im.mode!r} in {path}")
            arr = np.asarray(im)
    return arr.astype(np.float64) / 255.0


def write_image(img, path):
    """Write an image as 8-bit PNG/PGM/PPM. Exact inverse of read_image for
    data that originated from 8-bit files."""
    img = validate_image(img)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    arr8 = np.round(img * 255.0).astype(np.uint8)
    ext = os.path.splitext(path)[1].lower()
    if ext in (".pgm", ".ppm"):
        _write_pnm(arr8, path)
    else:
        PILImage.fromarray(arr8).save(path, format="PNG")


def _read_pfm(path):
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic not in (b"Pf", b"PF"):
            raise ValueError(f"malformed PFM header in {path}")
        dims = f.readline().split()
        width, height = int(dims[0]), int(dims[1])
        scale = float(f.readline().strip())
        endian = "<" if scale < 0 else ">"
        channels = 3 if magic == b"PF" else 1
        raster = np.frombuffer(f.read(), dtype=endian + "f4", count=width * height * channels)
    if raster.size != width * height * channels:
        raise ValueError(f"truncated PFM raster in {path}")
    data = raster.reshape(height, width, channels)[::-1]  # PFM rows are bottom-up
    return data[:, :, 0] if channels == 1 else data


def _write_pfm(data, path):
    data = np.asarray(data, dtype="<f4")
    with open(path, "wb") as f:
        f.write(b"Pf\n%d %d\n-1.0\n" % (data.shape[1], data.shape[0]))
        f.write(data[::-1].tobytes())


def read_disparity(path, format):
    """Read a disparity map. format is 'kitti_png16' or 'pfm'; invalid pixels
    come back as -1 in both cases."""
    if format == "kitti_png16":
        with PILImage.open(path) as im:
            arr = np.asarray(im)
        if arr.dtype not in (np.uint16, np.int32):
            raise ValueError(f"expected 16-bit PNG in {path}, got {arr.dtype}")
        disp = arr.astype(np.float64) / 256.0
        disp[arr == 0] = INVALID_DISPARITY
        return disp
    if format == "pfm":
        disp = _read_pfm(path).astype(np.float64)
        if disp.ndim != 2:
            raise ValueError(f"expected single-channel PFM in {path}")
        return disp
    raise ValueError(f"unknown disparity format {format!r}")


def write_disparity(disp, path, format):
    """Write a disparity map. kitti_png16 quantizes to 1/256 px and encodes
    invalid as stored 0; pfm stores float32 with -1 preserved."""
    disp = validate_disparity(disp)
    invalid = disp == INVALID_DISPARITY
    if format == "kitti_png16":
        if np.any(disp[~invalid] > _KITTI_MAX_DISPARITY):
            raise ValueError("disparity exceeds kitti_png16 range")
        stored = np.round(disp * 256.0).astype(np.uint16)
        stored[invalid] = 0
        PILImage.fromarray(stored).save(path, format="PNG")
    elif format == "pfm":
        _write_pfm(disp, path)
    else:
        raise ValueError(f"unknown disparity format {format!r}")


def disparity_format_for(path):
    """Infer the disparity format from a filename extension."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".png":
        return "kitti_png16"
    if ext == ".pfm":
        return "pfm"
    raise ValueError(f"cannot infer disparity format from {path!r}")
