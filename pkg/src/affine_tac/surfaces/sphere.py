"""Round spheres, their atlases, and maps of them into affine space"""

import logging
from collections.abc import Callable

import numpy as np

from affine_tac.manifold import Atlas, Chart

logger = logging.getLogger(__name__)

# (F(p), DF(p), D²F(p)) with shapes (..., M), (..., M, m), (..., M, m, m)
MapJet = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]

# Polar angle kept away from the coordinate singularity
POLAR_MARGIN = np.pi / 6

# Rotation taking the z-axis chart onto the x-axis chart
_X_AXIS_ROTATION = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])

STEREOGRAPHIC_HALF_WIDTH = 1.2


def spherical_jet(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jet of f(θ, v) = (sinθ cos v, sinθ sin v, cosθ)"""
    theta, v = u[..., 0], u[..., 1]
    st, ct, sv, cv = np.sin(theta), np.cos(theta), np.sin(v), np.cos(v)
    zero = np.zeros_like(theta)

    point = np.stack([st * cv, st * sv, ct], axis=-1)
    d_theta = np.stack([ct * cv, ct * sv, -st], axis=-1)
    d_v = np.stack([-st * sv, st * cv, zero], axis=-1)
    d_tt = -point
    d_tv = np.stack([-ct * sv, ct * cv, zero], axis=-1)
    d_vv = np.stack([-st * cv, -st * sv, zero], axis=-1)

    d1 = np.stack([d_theta, d_v], axis=-2)
    d2 = np.stack([np.stack([d_tt, d_tv], axis=-2), np.stack([d_tv, d_vv], axis=-2)], axis=-3)
    return point, d1, d2


def spherical_chart(chart_id: str, rotation: np.ndarray | None = None) -> Chart:
    """A rotated spherical-coordinate chart with the poles cut away"""
    rotation = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)

    def jet(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        point, d1, d2 = spherical_jet(u)
        return point @ rotation.T, d1 @ rotation.T, d2 @ rotation.T

    return Chart(
        id=chart_id,
        lower=np.array([POLAR_MARGIN, -np.pi]),
        upper=np.array([np.pi - POLAR_MARGIN, np.pi]),
        periodic=(False, True),
        jet=jet,
    )


def spherical_atlas() -> Atlas:
    """The unit sphere S² as two spherical charts with poles on the z- and x-axes"""
    return Atlas(
        charts=(
            spherical_chart("z_axis"),
            spherical_chart("x_axis", _X_AXIS_ROTATION),
        ),
        name="unit_sphere",
        betti=(1, 0, 1),
    )


def stereographic_chart(chart_id: str, n: int, upper: bool) -> Chart:
    """Inverse stereographic projection onto S^n ⊂ R^{n+1}

    The lower chart sends u = 0 to the south pole, the upper chart to the north pole.
    """
    sign = 1.0 if upper else -1.0

    def jet(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = np.sum(u**2, axis=-1)[..., None]
        d = 1 + s
        eye = np.eye(n)

        g = 2 * u / d
        q = sign * (1 - s) / d
        # dg[..., i, k] = ∂_i g_k
        dg = 2 * eye / d[..., None] - 4 * u[..., :, None] * u[..., None, :] / d[..., None] ** 2
        dq = -sign * 4 * u / d**2

        dd = d[..., None, None]
        ui = u[..., :, None, None]
        uj = u[..., None, :, None]
        uk = u[..., None, None, :]
        # d2g[..., i, j, k] = ∂_i∂_j g_k
        d2g = (
            -4 * (eye[:, None, :] * uj + eye[None, :, :] * ui + eye[:, :, None] * uk) / dd**2
            + 16 * ui * uj * uk / dd**3
        )
        outer = u[..., :, None] * u[..., None, :]
        d2q = -sign * (4 * eye / d[..., None] ** 2 - 16 * outer / d[..., None] ** 3)

        point = np.concatenate([g, q], axis=-1)
        d1 = np.concatenate([dg, dq[..., None]], axis=-1)
        d2 = np.concatenate([d2g, d2q[..., None]], axis=-1)
        return point, d1, d2

    return Chart(
        id=chart_id,
        lower=np.full(n, -STEREOGRAPHIC_HALF_WIDTH),
        upper=np.full(n, STEREOGRAPHIC_HALF_WIDTH),
        periodic=(False,) * n,
        jet=jet,
    )


def stereographic_atlas(n: int) -> Atlas:
    """The unit sphere S^n as two stereographic charts"""
    return Atlas(
        charts=(
            stereographic_chart("south", n, upper=False),
            stereographic_chart("north", n, upper=True),
        ),
        name=f"unit_sphere_{n}",
        betti=(1,) + (0,) * (n - 1) + (1,),
    )


def composite_chart(chart: Chart, map_jet: MapJet) -> Chart:
    """The chart of F ∘ f for a smooth map F of the ambient space"""

    def jet(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        source = chart.evaluate(u)
        value, diff, hess = map_jet(source.point)
        d1 = np.einsum("...ab,...ib->...ia", diff, source.d1)
        d2 = np.einsum("...ab,...ijb->...ija", diff, source.d2) + np.einsum(
            "...abc,...ib,...jc->...ija", hess, source.d1, source.d1,
        )
        return value, d1, d2

    return Chart(
        id=chart.id,
        lower=chart.lower,
        upper=chart.upper,
        periodic=chart.periodic,
        jet=jet,
        rank_tol=chart.rank_tol,
    )


def composite_atlas(atlas: Atlas, map_jet: MapJet, name: str) -> Atlas:
    """Apply an ambient map to every chart of an atlas"""
    return Atlas(
        charts=tuple(composite_chart(chart, map_jet) for chart in atlas.charts),
        name=name,
        betti=atlas.betti,
    )


def linear_map_jet(matrix: np.ndarray) -> MapJet:
    """The jet of p ↦ A p"""
    matrix = np.asarray(matrix, dtype=float)

    def map_jet(p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        lead = p.shape[:-1]
        diff = np.broadcast_to(matrix, lead + matrix.shape)
        hess = np.zeros(lead + matrix.shape + (matrix.shape[1],))
        return p @ matrix.T, diff, hess

    return map_jet


def sphere_in_r4_atlas() -> Atlas:
    """S² ⊂ R³ × {0} ⊂ R⁴"""
    embedding = np.vstack([np.eye(3), np.zeros((1, 3))])
    return composite_atlas(spherical_atlas(), linear_map_jet(embedding), "sphere_in_R4")
