import numpy as np
import pytest

from stereoproxy import imagery


def test_to_grayscale_identity_for_single_channel():
    img = np.random.default_rng(0).random((5, 7))
    assert imagery.to_grayscale(img) is img or np.array_equal(imagery.to_grayscale(img), img)


def test_to_grayscale_weights_sum_to_one():
    img = np.ones((3, 4, 3))
    assert np.allclose(imagery.to_grayscale(img), 1.0)


def test_to_grayscale_red_pixel():
    img = np.zeros((1, 1, 3))
    img[0, 0, 0] = 1.0
    assert imagery.to_grayscale(img)[0, 0] == pytest.approx(0.299)


def test_to_grayscale_range(rng):
    img = rng.random((6, 6, 3))
    gray = imagery.to_grayscale(img)
    assert gray.min() >= 0 and gray.max() <= 1


def test_pgm_endpoints(tmp_path):
    for value, expected in ((255, 1.0), (0, 0.0)):
        path = tmp_path / f"px{value}.pgm"
        path.write_bytes(b"P5\n1 1\n255\n" + bytes([value]))
        img = imagery.read_image(str(path))
        assert img.shape == (1, 1)
        assert img[0, 0] == expected


def test_image_round_trip_bit_exact(tmp_path, rng):
    raw = rng.integers(0, 256, size=(11, 13), dtype=np.uint8)
    for ext in ("png", "pgm"):
        path = tmp_path / f"img.{ext}"
        imagery.write_image(raw / 255.0, str(path))
        again = imagery.read_image(str(path))
        assert np.array_equal(np.round(again * 255).astype(np.uint8), raw)


def test_ppm_round_trip(tmp_path, rng):
    raw = rng.integers(0, 256, size=(4, 5, 3), dtype=np.uint8)
    path = tmp_path / "img.ppm"
    imagery.write_image(raw / 255.0, str(path))
    assert np.array_equal(np.round(imagery.read_image(str(path)) * 255).astype(np.uint8), raw)


def test_kitti_png16_encoding(tmp_path):
    disp = np.array([[1.0, -1.0, 37.25]])
    path = tmp_path / "d.png"
    imagery.write_disparity(disp, str(path), "kitti_png16")
    from PIL import Image

    stored = np.asarray(Image.open(path))
    assert stored[0, 0] == 256  # disparity 1.0 -> stored 256
    assert stored[0, 1] == 0    # invalid -> stored 0
    back = imagery.read_disparity(str(path), "kitti_png16")
    assert back[0, 1] == imagery.INVALID_DISPARITY
    assert np.allclose(back[0, [0, 2]], disp[0, [0, 2]], atol=1.0 / 512)


def test_kitti_png16_round_trip_quantization(tmp_path, rng):
    disp = rng.random((9, 9)) * 100
    disp[0, 0] = imagery.INVALID_DISPARITY
    path = tmp_path / "d.png"
    imagery.write_disparity(disp, str(path), "kitti_png16")
    back = imagery.read_disparity(str(path), "kitti_png16")
    valid = disp != imagery.INVALID_DISPARITY
    assert np.all(np.abs(back[valid] - disp[valid]) <= 0.5 / 256 + 1e-12)
    assert back[0, 0] == imagery.INVALID_DISPARITY


def test_kitti_png16_overflow(tmp_path):
    with pytest.raises(ValueError):
        imagery.write_disparity(np.array([[300.0]]), str(tmp_path / "d.png"), "kitti_png16")


def test_pfm_round_trip_float32_exact(tmp_path, rng):
    disp = (rng.random((7, 5)) * 60).astype(np.float32).astype(np.float64)
    disp[2, 3] = imagery.INVALID_DISPARITY
    path = tmp_path / "d.pfm"
    imagery.write_disparity(disp, str(path), "pfm")
    back = imagery.read_disparity(str(path), "pfm")
    assert np.array_equal(back.astype(np.float32), disp.astype(np.float32))
    assert back[2, 3] == imagery.INVALID_DISPARITY


def test_pfm_malformed_header(tmp_path):
    path = tmp_path / "bad.pfm"
    path.write_bytes(b"Qx\n3 3\n-1.0\n")
    with pytest.raises(ValueError):
        imagery.read_disparity(str(path), "pfm")


def test_validate_disparity_rejects_negative():
    with pytest.raises(ValueError):
        imagery.validate_disparity(np.array([[-0.5]]))


def test_camera_calib_validation():
    with pytest.raises(ValueError):
        imagery.CameraCalib(focal_length=0, baseline=0.5, native_width=1242)
