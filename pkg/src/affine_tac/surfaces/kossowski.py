"""The convex surface Σ = {(z - r)⁴ + (z + r)⁴ = 16}, r = √(x² + y²)

Σ is convex but its affine fundamental form degenerates along the circle u = 0 of the
charts f_±(u, v) = (E(u) cos v, E(u) sin v, ±F(u)). Expanding the defining equation gives
r⁴ + 6r²z² + z⁴ = 8, which is symmetric in r and z; the band and cap charts use the
solution r² = G(z²)² of that quartic.
"""

import logging

import numpy as np

from affine_tac import consts
from affine_tac.exceptions import InputError
from affine_tac.manifold import Atlas, Chart

logger = logging.getLogger(__name__)

# The chart parameter u ranges over [-U_STAR, U_STAR]
U_STAR = 0.5**0.25

BAND_HALF_HEIGHT = 1.3
CAP_HALF_WIDTH = 0.8


def w(u: np.ndarray) -> np.ndarray:
    """(1 - u⁴)^{1/4}"""
    return (1 - u**4) ** 0.25


def _w_derivatives(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    root = w(u)
    dw = -(u**3) / root**3
    # Uses w⁴ + u⁴ = 1
    d2w = -3 * u**2 / root**7
    return root, dw, d2w


def E(u: np.ndarray) -> np.ndarray:
    """E(u) = u - (1 - u⁴)^{1/4}"""
    return u - w(u)


def F(u: np.ndarray) -> np.ndarray:
    """F(u) = u + (1 - u⁴)^{1/4}"""
    return u + w(u)


def profile_derivatives(u: np.ndarray) -> dict[str, np.ndarray]:
    """E, F and their first two derivatives"""
    root, dw, d2w = _w_derivatives(np.asarray(u, dtype=float))
    return {
        "E": u - root, "dE": 1 - dw, "d2E": -d2w,
        "F": u + root, "dF": 1 + dw, "d2F": d2w,
    }


def delta(u: np.ndarray) -> np.ndarray:
    """δ(u) = √(E'(u)² + F'(u)²)"""
    p = profile_derivatives(u)
    return np.hypot(p["dE"], p["dF"])


def xi_plus(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """The transversal field of f_+, (F' cos v, F' sin v, -E') / δ"""
    p = profile_derivatives(u)
    scale = np.hypot(p["dE"], p["dF"])
    field = np.stack([p["dF"] * np.cos(v), p["dF"] * np.sin(v), -p["dE"]], axis=-1)
    return field / scale[..., None]


def beta(u: np.ndarray) -> np.ndarray:
    """β(u) with det α_ξ = u² β(u) on f_+

    Obtained by differentiating the chart: α_ξ(∂_u, ∂_u) = 6u² / (δ w⁷),
    α_ξ(∂_v, ∂_v) = -E F' / δ and α_ξ(∂_u, ∂_v) = 0.
    """
    u = np.asarray(u, dtype=float)
    root = w(u)
    return 6 * (root - u) * (root**3 - u**3) / (delta(u) ** 2 * root**10)


def beta_printed(u: np.ndarray) -> np.ndarray:
    """The published closed form for β, equal to β(u) E(u)²"""
    u = np.asarray(u, dtype=float)
    s = 1 - u**4
    return (
        6 / (delta(u) ** 2 * s**3.25)
        * (-u + s**0.25)
        * (-1 + u**4 + u * s**0.75)
        * (-1 + u**3 * s**0.25 + u * s**0.75)
    )


def lambda_closed_form(u: np.ndarray) -> np.ndarray:
    """λ(u) = u √β(u)"""
    return u * np.sqrt(beta(u))


def sigma_chart_jet(u: np.ndarray, sign: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jet of f_±(u, v) = (E cos v, E sin v, ±F)"""
    p = profile_derivatives(u[..., 0])
    sv, cv = np.sin(u[..., 1]), np.cos(u[..., 1])
    zero = np.zeros_like(sv)

    point = np.stack([p["E"] * cv, p["E"] * sv, sign * p["F"]], axis=-1)
    d_u = np.stack([p["dE"] * cv, p["dE"] * sv, sign * p["dF"]], axis=-1)
    d_v = np.stack([-p["E"] * sv, p["E"] * cv, zero], axis=-1)
    d_uu = np.stack([p["d2E"] * cv, p["d2E"] * sv, sign * p["d2F"]], axis=-1)
    d_uv = np.stack([-p["dE"] * sv, p["dE"] * cv, zero], axis=-1)
    d_vv = np.stack([-p["E"] * cv, -p["E"] * sv, zero], axis=-1)

    d1 = np.stack([d_u, d_v], axis=-2)
    d2 = np.stack([np.stack([d_uu, d_uv], axis=-2), np.stack([d_uv, d_vv], axis=-2)], axis=-3)
    return point, d1, d2


def quartic_root(s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """G(s) = √(√(8s² + 8) - 3s) and its first two derivatives

    For t ≥ 0, the point (r, z) = (G(t²), t) and its mirror (t, G(t²)) lie on Σ.
    """
    root = np.sqrt(8 * s**2 + 8)
    q = root - 3 * s
    dq = 8 * s / root - 3
    d2q = 64 / root**3
    g = np.sqrt(q)
    dg = dq / (2 * g)
    d2g = d2q / (2 * g) - dq**2 / (4 * q**1.5)
    return g, dg, d2g


def band_jet(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jet of (z, v) ↦ (ρ(z) cos v, ρ(z) sin v, z) with ρ(z) = G(z²)"""
    z, v = u[..., 0], u[..., 1]
    g, dg, d2g = quartic_root(z**2)
    rho, d_rho, d2_rho = g, 2 * z * dg, 2 * dg + 4 * z**2 * d2g
    sv, cv = np.sin(v), np.cos(v)
    zero, one = np.zeros_like(z), np.ones_like(z)

    point = np.stack([rho * cv, rho * sv, z], axis=-1)
    d_z = np.stack([d_rho * cv, d_rho * sv, one], axis=-1)
    d_v = np.stack([-rho * sv, rho * cv, zero], axis=-1)
    d_zz = np.stack([d2_rho * cv, d2_rho * sv, zero], axis=-1)
    d_zv = np.stack([-d_rho * sv, d_rho * cv, zero], axis=-1)
    d_vv = np.stack([-rho * cv, -rho * sv, zero], axis=-1)

    d1 = np.stack([d_z, d_v], axis=-2)
    d2 = np.stack([np.stack([d_zz, d_zv], axis=-2), np.stack([d_zv, d_vv], axis=-2)], axis=-3)
    return point, d1, d2


def cap_jet(u: np.ndarray, sign: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jet of the graph chart (x, y) ↦ (x, y, ±G(x² + y²))"""
    g, dg, d2g = quartic_root(np.sum(u**2, axis=-1))
    lead = u.shape[:-1]

    point = np.concatenate([u, sign * g[..., None]], axis=-1)
    d1 = np.zeros(lead + (2, 3))
    d1[..., 0, 0] = d1[..., 1, 1] = 1.0
    d1[..., :, 2] = sign * 2 * u * dg[..., None]
    d2 = np.zeros(lead + (2, 2, 3))
    d2[..., :, :, 2] = sign * (
        2 * np.eye(2) * dg[..., None, None]
        + 4 * u[..., :, None] * u[..., None, :] * d2g[..., None, None]
    )
    return point, d1, d2


def sigma_atlas(collar: float = consts.collar_width) -> Atlas:
    """Σ covered by f_± (minus an ε-collar at both ends), an equatorial band and two caps

    Args:
        collar: Width removed from each end of the u-interval of f_±
    """
    if not 0 < collar < U_STAR:
        raise InputError(f"Collar width must lie in (0, {U_STAR}), got {collar}")
    logger.debug(f"Building Sigma atlas with collar {collar}")

    def sigma_chart(chart_id: str, sign: float) -> Chart:
        return Chart(
            id=chart_id,
            lower=np.array([-U_STAR + collar, -np.pi]),
            upper=np.array([U_STAR - collar, np.pi]),
            periodic=(False, True),
            jet=lambda u: sigma_chart_jet(u, sign),
        )

    def cap_chart(chart_id: str, sign: float) -> Chart:
        return Chart(
            id=chart_id,
            lower=np.full(2, -CAP_HALF_WIDTH),
            upper=np.full(2, CAP_HALF_WIDTH),
            periodic=(False, False),
            jet=lambda u: cap_jet(u, sign),
        )

    band = Chart(
        id="band",
        lower=np.array([-BAND_HALF_HEIGHT, -np.pi]),
        upper=np.array([BAND_HALF_HEIGHT, np.pi]),
        periodic=(False, True),
        jet=band_jet,
    )
    return Atlas(
        charts=(
            sigma_chart("f_plus", 1.0),
            sigma_chart("f_minus", -1.0),
            band,
            cap_chart("cap_upper", 1.0),
            cap_chart("cap_lower", -1.0),
        ),
        name="sigma_kossowski",
        betti=(1, 0, 1),
        metadata={"collar": collar},
    )
