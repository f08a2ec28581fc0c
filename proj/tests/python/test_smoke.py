import json

import numpy as np
import pytest

import textcen


def test_centroid_and_region():
    grid = np.zeros((8, 8))
    grid[2, 5] = 1.0
    assert textcen.centroid(grid) == (2.0, 5.0)
    mask = textcen.rasterize_region("golden", 64, 64)
    assert mask.dtype == np.bool_
    assert mask.sum() == 546


def test_detect_and_mean():
    ramp = np.repeat(0.1 * np.arange(1, 5)[:, None], 4, axis=1)
    bottom = textcen.rasterize_region((0, 0.5, 1, 1), 4, 4)
    assert textcen.mean_in_region(ramp, bottom) == pytest.approx(0.35)
    assert not textcen.detect(ramp, bottom, 0.35)
    assert textcen.detect(ramp, bottom, 0.349)


def test_forces():
    assert textcen.repulsive_force((0, 0), (0, 2)) == pytest.approx((0.0, -0.5))
    row, col = textcen.displacement((32, 45), [(32, 49.5, 1.0)], 64, 64)
    assert col == pytest.approx(-9.364365, rel=1e-6)
    assert abs(row) < 1e-4
    with pytest.raises(TypeError):
        textcen.displacement((32, 45), [(32, 49.5, 1.0)], 64, 64, thetaa=0.3)


def test_warp_and_exclude():
    h, w = np.mgrid[0:64, 0:64]
    blob = np.exp(-((h - 32) ** 2 + (w - 58) ** 2) / 50.0)
    out, scaled, scale = textcen.warp_step(blob, (0, 8))
    assert scaled and scale[1] < 1.0
    assert out.shape == (64, 64) and out.min() >= 0.0
    mask = textcen.rasterize_region("center", 64, 64)
    ex = textcen.exclude(blob, mask, 0.5)
    assert np.all(ex[mask] == 0.0)
    assert np.allclose(ex[~mask], 0.5 * blob[~mask])


def test_metrics():
    assert textcen.vtcm(28.26, 29.89, 14.11) == pytest.approx(2.95, abs=0.01)
    ramp = np.tile(np.arange(8) / 7.0, (8, 1))
    full = np.ones((8, 8), dtype=bool)
    assert textcen.tv_loss(ramp, full) == pytest.approx(800 / 112)
    assert textcen.saliency_iou(np.ones((4, 4)), textcen.rasterize_region((0.5, 0, 1, 1), 4, 4)) == pytest.approx(50)
    with pytest.raises(textcen.TextcenError):
        textcen.vtcm(1.0, 0.0, 1.0)


def test_run_standard_scene():
    report = textcen.run()
    assert len(report["steps"]) == 50
    assert report["final"]["ever_flagged"] == [1]
    guided, unguided = report["metrics"]["guided"], report["metrics"]["unguided"]
    assert guided["saliency_iou"] < unguided["saliency_iou"]
    assert guided["tv_loss_in_R"] <= unguided["tv_loss_in_R"]
    scene = json.loads(textcen.standard_scene_json())
    scene["steps"] = 3
    assert len(textcen.run(scene)["steps"]) == 3
