import math

import numpy as np
import pytest

import fluidlens as fl


def test_generate_shapes_deterministic():
    a = fl.generate_shapes(32, 32, seed=7)
    b = fl.generate_shapes(32, 32, seed=7)
    assert a.shape == (32, 32, 3)
    assert np.array_equal(a, b)
    assert fl.generate_shapes(32, 32, seed=8).tobytes() != a.tobytes()


def test_metrics_closed_form():
    a = np.zeros((8, 8, 3), dtype=np.float32)
    b = np.full((8, 8, 3), 16.0 / 255.0, dtype=np.float32)
    m = fl.metrics(a, b)
    assert m["psnr"] == pytest.approx(20.0 * math.log10(255.0 / 16.0), abs=1e-3)
    assert fl.metrics(a, a)["psnr"] == math.inf


def test_metrics_shape_mismatch_raises():
    a = np.zeros((4, 4, 3), dtype=np.float32)
    b = np.zeros((4, 5, 3), dtype=np.float32)
    with pytest.raises(fl.ShapeError):
        fl.metrics(a, b)


def test_simulate_and_stack():
    target = fl.generate_shapes(32, 32, seed=1)
    frames = fl.simulate_video(target, seed=3, fps=10.0, duration=1.0)
    assert len(frames) == 10
    mean = fl.temporal_mean(frames)
    median = fl.temporal_median(frames)
    assert mean.shape == target.shape
    assert fl.metrics(mean, target)["psnr"] > 10.0
    assert fl.metrics(median, target)["psnr"] > 10.0
    # A frame subset is a different stack.
    mean2 = fl.temporal_mean(frames, n=2)
    assert not np.array_equal(mean, mean2)


def test_siftflow_mean_runs():
    target = fl.generate_shapes(32, 32, seed=2)
    frames = fl.simulate_video(target, seed=4, fps=10.0, duration=0.5)
    out = fl.siftflow_mean(frames)
    assert out.shape == target.shape


def test_blurs():
    img = fl.generate_shapes(24, 24, seed=5)
    for out in (
        fl.box_blur(img, 3),
        fl.gaussian_blur(img, 5, 2.0),
        fl.bilateral_blur(img, 5, 50.0),
    ):
        assert out.shape == img.shape
    flat = np.full((8, 8, 3), 0.25, dtype=np.float32)
    assert np.allclose(fl.gaussian_blur(flat, 5, 2.0), 0.25, atol=1e-5)


def test_png_round_trip(tmp_path):
    img = fl.generate_shapes(24, 24, seed=9)
    path = str(tmp_path / "img.png")
    fl.save_png(img, path)
    back = fl.load_png(path)
    assert np.allclose(back, img, atol=1.0 / 255.0)
    with pytest.raises(fl.IoError):
        fl.load_png(str(tmp_path / "missing.png"))


def test_receptive_field():
    config = fl.StcnConfig()
    config.layers = 1
    config.blocks_per_layer = 1
    spatial, temporal = fl.receptive_field(config)
    assert spatial == 7
    assert temporal == 1
    config.variant = fl.StcnVariant.STACKED
    assert fl.receptive_field(config)[0] == 7
