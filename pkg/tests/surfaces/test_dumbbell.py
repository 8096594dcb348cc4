"""Tests for the dumbbell surface"""
import numpy as np
import pytest

from affine_tac.exceptions import InputError
from affine_tac.surfaces.dumbbell import dumbbell_atlas, dumbbell_map, neck_profile


def test_neck_profile():
    w, dw, d2w = neck_profile(np.array([0.0, 10.0]), depth=0.6, sharpness=8.0)
    np.testing.assert_allclose(w, [0.4, 1.0])
    np.testing.assert_allclose(dw, [0.0, 0.0])
    assert d2w[0] == pytest.approx(2 * 8.0 * 0.6)


def test_neck_radius():
    atlas = dumbbell_atlas(depth=0.6, sharpness=8.0, stretch=1.5)
    points = atlas.sample_points(16)
    waist = points[np.abs(points[:, 2]) < 1e-12]
    np.testing.assert_allclose(np.hypot(waist[:, 0], waist[:, 1]), 0.4)
    assert points[:, 2].max() == pytest.approx(1.5, abs=0.05)


def test_map_jet_derivatives():
    map_jet = dumbbell_map()
    p = np.array([0.3, -0.4, 0.2])
    _, diff, hess = map_jet(p)
    h = 1e-6
    for k in range(3):
        step = np.zeros(3)
        step[k] = h
        value_plus, diff_plus, _ = map_jet(p + step)
        value_minus, diff_minus, _ = map_jet(p - step)
        np.testing.assert_allclose(diff[:, k], (value_plus - value_minus) / (2 * h), atol=1e-8)
        np.testing.assert_allclose(hess[:, :, k], (diff_plus - diff_minus) / (2 * h), atol=1e-6)


def test_depth_out_of_range():
    with pytest.raises(InputError):
        dumbbell_atlas(depth=1.0)
