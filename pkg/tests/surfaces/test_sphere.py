"""Tests for the sphere atlases"""
import numpy as np

from affine_tac.manifold import eval_jet
from affine_tac.surfaces.sphere import (
    composite_atlas,
    linear_map_jet,
    sphere_in_r4_atlas,
    spherical_atlas,
    stereographic_atlas,
)


def test_spherical_charts_lie_on_sphere():
    atlas = spherical_atlas()
    points = atlas.sample_points(10)
    np.testing.assert_allclose(np.linalg.norm(points, axis=-1), 1.0)
    assert atlas.betti == (1, 0, 1)


def test_x_axis_chart_covers_the_poles():
    pole = eval_jet(spherical_atlas().chart("x_axis"), np.array([np.pi / 2, 0.0])).point
    np.testing.assert_allclose(pole, [0, 0, -1], atol=1e-15)


def test_stereographic_points_on_s3():
    atlas = stereographic_atlas(3)
    assert atlas.n == 3
    assert atlas.m == 4
    assert atlas.betti == (1, 0, 0, 1)
    for chart in atlas.charts:
        jets = chart.evaluate(chart.grid([4, 4, 4]).reshape(-1, 3))
        np.testing.assert_allclose(np.linalg.norm(jets.point, axis=-1), 1.0)
        # Tangent vectors are orthogonal to the position vector
        radial = np.einsum("...ik,...k->...i", jets.d1, jets.point)
        np.testing.assert_allclose(radial, 0, atol=1e-12)


def test_stereographic_poles():
    atlas = stereographic_atlas(2)
    south = eval_jet(atlas.chart("south"), np.zeros(2)).point
    north = eval_jet(atlas.chart("north"), np.zeros(2)).point
    np.testing.assert_allclose(south, [0, 0, -1])
    np.testing.assert_allclose(north, [0, 0, 1])


def test_stereographic_second_derivatives():
    chart = stereographic_atlas(3).chart("south")
    u = np.array([[0.3, -0.2, 0.5]])
    h = 1e-5
    jets = chart.evaluate(u)
    for i in range(3):
        step = np.zeros(3)
        step[i] = h
        numeric = (chart.evaluate(u + step).d1 - chart.evaluate(u - step).d1) / (2 * h)
        np.testing.assert_allclose(jets.d2[:, i], numeric, atol=1e-8)


def test_composite_atlas_applies_map():
    matrix = np.array([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]])
    atlas = composite_atlas(spherical_atlas(), linear_map_jet(matrix), "ellipsoid")
    points = atlas.sample_points(6)
    np.testing.assert_allclose(np.sum((points / [2.0, 1.0, 0.5]) ** 2, axis=-1), 1.0)
    assert atlas.name == "ellipsoid"


def test_sphere_in_r4():
    atlas = sphere_in_r4_atlas()
    assert atlas.m == 4
    points = atlas.sample_points(6)
    np.testing.assert_array_equal(points[:, 3], 0)
