from dataclasses import replace

import numpy as np
import pytest

from affine_tac.exceptions import DegenerateError, DomainError, InputError
from affine_tac.manifold import (
    Atlas,
    Chart,
    affine_image,
    eval_jet,
    eval_jets,
    finite_difference_jet,
    sample_parameters,
)
from affine_tac.surfaces.kossowski import sigma_atlas
from affine_tac.surfaces.sphere import spherical_atlas
from affine_tac.surfaces.torus import torus_atlas, torus_value


def test_spherical_chart_jet():
    jet = eval_jet(spherical_atlas().chart("z_axis"), np.array([np.pi / 2, 0.0]))
    np.testing.assert_allclose(jet.point, [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(jet.d1[0], [0, 0, -1], atol=1e-15)
    np.testing.assert_allclose(jet.d1[1], [0, 1, 0], atol=1e-15)


def test_finite_difference_jet_matches_torus():
    u = np.array([[0.3, -1.1], [2.0, 0.4], [-2.5, 3.0]])
    analytic = torus_atlas().charts[0].evaluate(u)
    numeric = eval_jets(torus_atlas(finite_difference=True).charts[0], u)
    np.testing.assert_allclose(numeric.point, analytic.point)
    np.testing.assert_allclose(numeric.d1, analytic.d1, atol=1e-6)
    np.testing.assert_allclose(numeric.d2, analytic.d2, atol=1e-5)
    assert numeric.asymmetry() == 0


def test_richardson_is_more_accurate():
    u = np.array([[0.7, 0.2]])
    analytic = torus_atlas().charts[0].evaluate(u)
    plain = finite_difference_jet(torus_value, u, 1e-2)
    extrapolated = finite_difference_jet(torus_value, u, 1e-2, richardson=True)
    assert np.abs(extrapolated.d1 - analytic.d1).max() < np.abs(plain.d1 - analytic.d1).max()


def test_sigma_chart_at_origin():
    jet = eval_jet(sigma_atlas().chart("f_plus"), np.array([0.0, 0.0]))
    np.testing.assert_allclose(jet.point, [-1, 0, 1])


def test_eval_jet_outside_domain():
    with pytest.raises(DomainError):
        eval_jet(sigma_atlas().chart("f_plus"), np.array([0.9, 0.0]))


def test_eval_jet_wraps_periodic_axes():
    chart = torus_atlas().charts[0]
    inside = eval_jet(chart, np.array([0.5, 0.25]))
    wrapped = eval_jet(chart, np.array([0.5 + 2 * np.pi, 0.25 - 4 * np.pi]))
    np.testing.assert_allclose(wrapped.point, inside.point, atol=1e-12)


def test_eval_jet_wrong_shape():
    with pytest.raises(InputError):
        eval_jet(torus_atlas().charts[0], np.zeros(3))


def test_rank_deficient_chart():
    def jet(u):
        lead = u.shape[:-1]
        point = np.stack([u[..., 0], u[..., 0], np.zeros(lead)], axis=-1)
        d1 = np.broadcast_to(np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 0.0]]), lead + (2, 3))
        return point, d1, np.zeros(lead + (2, 2, 3))

    chart = Chart(id="line", lower=[0, 0], upper=[1, 1], periodic=(False, False), jet=jet)
    with pytest.raises(DegenerateError):
        eval_jet(chart, np.array([0.5, 0.5]))


def test_chart_validation():
    with pytest.raises(InputError):
        Chart(id="empty", lower=[0, 0], upper=[0, 1], periodic=(False, False), value=torus_value)
    with pytest.raises(InputError):
        Chart(id="nothing", lower=[0, 0], upper=[1, 1], periodic=(False, False))


def test_grid_shape_and_resolution():
    chart = sigma_atlas().chart("f_plus")
    grid = chart.grid([4, 6])
    assert grid.shape == (4, 6, 2)
    assert np.all(chart.contains(grid.reshape(-1, 2)))
    with pytest.raises(InputError):
        chart.grid([1, 6])


def test_sample_parameters_torus():
    samples = sample_parameters(torus_atlas(), (4, 4))
    assert len(samples) == 16
    assert {chart_id for chart_id, _ in samples} == {"torus"}


def test_sample_parameters_drops_overlaps():
    atlas = spherical_atlas()
    samples = sample_parameters(atlas, 8)
    assert len(samples) < 2 * 64
    chart_of = {"z_axis": atlas.chart("z_axis"), "x_axis": atlas.chart("x_axis")}
    points = np.array([chart_of[c].evaluate(u[None]).point[0] for c, u in samples])
    gaps = np.linalg.norm(points[:, None] - points[None], axis=-1) + np.eye(len(points))
    assert gaps.min() > atlas.dedup_radius


def test_atlas_properties():
    atlas = spherical_atlas()
    assert atlas.n == 2
    assert atlas.m == 3
    assert atlas.euler == 2
    assert atlas.diameter == pytest.approx(2 * np.sqrt(3), abs=0.05)
    assert atlas.is_connected()
    with pytest.raises(InputError):
        atlas.chart("missing")


def test_atlas_validation():
    chart = torus_atlas().charts[0]
    with pytest.raises(InputError):
        Atlas(charts=())
    with pytest.raises(InputError):
        Atlas(charts=(chart, chart))


def test_disconnected_atlas():
    chart = torus_atlas().charts[0]
    shifted = affine_image(chart, np.eye(3), np.array([100.0, 0.0, 0.0]))
    atlas = Atlas(charts=(chart, replace(shifted, id="far")))
    assert not atlas.is_connected()


def test_affine_image():
    chart = torus_atlas().charts[0]
    matrix = np.array([[2.0, 0.0, 0.0], [0.0, 1.0, 1.0]])
    image = affine_image(chart, matrix, np.array([1.0, 0.0, 0.0]))
    u = np.array([[0.1, 0.2]])
    source, target = chart.evaluate(u), image.evaluate(u)
    np.testing.assert_allclose(target.point, (source.point - [1, 0, 0]) @ matrix.T)
    np.testing.assert_allclose(target.d2, source.d2 @ matrix.T)
