"""Torus of revolution"""

import numpy as np

from affine_tac.manifold import Atlas, Chart


def torus_value(u: np.ndarray, major: float = 2.0, minor: float = 1.0) -> np.ndarray:
    """f(u, v) = ((R + a cos u) cos v, (R + a cos u) sin v, a sin u)"""
    ring = major + minor * np.cos(u[..., 0])
    return np.stack(
        [ring * np.cos(u[..., 1]), ring * np.sin(u[..., 1]), minor * np.sin(u[..., 0])],
        axis=-1,
    )


def torus_jet(
    u: np.ndarray, major: float = 2.0, minor: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analytic jet of the torus of revolution"""
    su, cu = np.sin(u[..., 0]), np.cos(u[..., 0])
    sv, cv = np.sin(u[..., 1]), np.cos(u[..., 1])
    ring = major + minor * cu
    zero = np.zeros_like(su)

    point = np.stack([ring * cv, ring * sv, minor * su], axis=-1)
    d_u = np.stack([-minor * su * cv, -minor * su * sv, minor * cu], axis=-1)
    d_v = np.stack([-ring * sv, ring * cv, zero], axis=-1)
    d_uu = np.stack([-minor * cu * cv, -minor * cu * sv, -minor * su], axis=-1)
    d_uv = np.stack([minor * su * sv, -minor * su * cv, zero], axis=-1)
    d_vv = np.stack([-ring * cv, -ring * sv, zero], axis=-1)

    d1 = np.stack([d_u, d_v], axis=-2)
    d2 = np.stack([np.stack([d_uu, d_uv], axis=-2), np.stack([d_uv, d_vv], axis=-2)], axis=-3)
    return point, d1, d2


def torus_atlas(major: float = 2.0, minor: float = 1.0, finite_difference: bool = False) -> Atlas:
    """The torus as a single doubly periodic chart

    Args:
        major: Distance R from the axis to the centre of the tube
        minor: Tube radius a
        finite_difference: Differentiate the value function numerically instead of using the
            analytic jet
    """
    if finite_difference:
        sources = {"value": lambda u: torus_value(u, major, minor)}
    else:
        sources = {"jet": lambda u: torus_jet(u, major, minor)}
    chart = Chart(
        id="torus",
        lower=np.array([-np.pi, -np.pi]),
        upper=np.array([np.pi, np.pi]),
        periodic=(True, True),
        **sources,
    )
    return Atlas(charts=(chart,), name="torus_revolution", betti=(1, 2, 1))
