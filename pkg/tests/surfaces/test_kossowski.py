"""Tests for the surface Σ and its closed forms"""
import numpy as np
import pytest

from affine_tac.exceptions import InputError
from affine_tac.manifold import eval_jet
from affine_tac.surfaces.kossowski import (
    U_STAR,
    E,
    F,
    beta,
    beta_printed,
    delta,
    lambda_closed_form,
    quartic_root,
    sigma_atlas,
    xi_plus,
)


def on_sigma(points):
    r = np.hypot(points[..., 0], points[..., 1])
    z = points[..., 2]
    return (z - r) ** 4 + (z + r) ** 4 - 16


def test_closed_forms_at_zero():
    assert E(0.0) == -1.0
    assert F(0.0) == 1.0
    assert delta(0.0) == pytest.approx(np.sqrt(2))
    assert beta(0.0) == pytest.approx(3.0)
    h = 1e-6
    slope = (lambda_closed_form(h) - lambda_closed_form(-h)) / (2 * h)
    assert slope == pytest.approx(np.sqrt(3), rel=1e-6)


def test_u_star():
    assert U_STAR == pytest.approx(0.5**0.25)
    assert E(U_STAR) == pytest.approx(0.0, abs=1e-12)


def test_printed_beta_matches():
    u = np.linspace(-0.8, 0.8, 41)
    np.testing.assert_allclose(beta_printed(u), beta(u) * E(u) ** 2, rtol=1e-10)
    assert np.all(beta(u) > 0)


def test_quartic_root_on_sigma():
    t = np.linspace(0, 1.25, 26)
    g, dg, d2g = quartic_root(t**2)
    np.testing.assert_allclose(on_sigma(np.stack([g, 0 * t, t], axis=-1)), 0, atol=1e-10)
    np.testing.assert_allclose(on_sigma(np.stack([t, 0 * t, g], axis=-1)), 0, atol=1e-10)

    h = 1e-6
    s = np.array([0.2, 0.9])
    np.testing.assert_allclose(
        quartic_root(s)[1], (quartic_root(s + h)[0] - quartic_root(s - h)[0]) / (2 * h), rtol=1e-6,
    )
    np.testing.assert_allclose(
        quartic_root(s)[2], (quartic_root(s + h)[1] - quartic_root(s - h)[1]) / (2 * h), rtol=1e-5,
    )


def test_every_chart_lies_on_sigma():
    atlas = sigma_atlas()
    for chart in atlas.charts:
        jets = chart.evaluate(chart.grid([9, 9]).reshape(-1, 2))
        np.testing.assert_allclose(on_sigma(jets.point), 0, atol=1e-9)
    assert atlas.is_connected()
    assert atlas.metadata["collar"] == 1e-3


def test_f_plus_at_origin():
    jet = eval_jet(sigma_atlas().chart("f_plus"), np.zeros(2))
    np.testing.assert_allclose(jet.point, [-1, 0, 1])
    xi = xi_plus(np.array(0.0), np.array(0.0))
    np.testing.assert_allclose(np.linalg.norm(xi), 1.0)
    # Normal to the profile curve (E', F') in the (r, z) plane
    np.testing.assert_allclose(xi @ jet.d1[0], 0, atol=1e-15)


def test_collar_out_of_range():
    with pytest.raises(InputError):
        sigma_atlas(collar=0.0)
    with pytest.raises(InputError):
        sigma_atlas(collar=U_STAR)
