"""The Gauss map into the unit ellipsoid and the Lipschitz–Killing curvature"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import xarray as xr

from affine_tac.equiaffine import FundamentalData, TransversalFrame, decompose_batch
from affine_tac.exceptions import DegenerateError, InputError, PathologyError
from affine_tac.exterior import MultiCovector, UnitEllipsoid, heights, wedge_coefficients
from affine_tac.manifold import Atlas, Chart, ImmersionJet

logger = logging.getLogger(__name__)

# Steps below this, relative to the domain diameter, are lost in round-off
MIN_RELATIVE_STEP = 1e-12

# Default Gauss-map differentiation step, relative to the domain diameter
GAUSS_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class GaussValue:
    """ν(η) ∈ S for one point of the ellipsoid bundle

    Attributes:
        phi: ν(η), a point of S
        mu: Positive normalisation with η = ±μ·(fiber element)
        orientation: +1 or -1, the sheet of the bundle
    """

    phi: MultiCovector
    mu: float
    orientation: int


def gauss_coefficients(
    d1: np.ndarray,
    fiber: np.ndarray,
    theta_value: np.ndarray,
    S: UnitEllipsoid,
    orientation: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched Gauss map

    Args:
        d1: Tangent vectors (..., n, m)
        fiber: The r - 1 fiber vectors (..., r-1, m)
        theta_value: θ(∂_1, …, ∂_n) at the same points
        S: The unit ellipsoid
        orientation: Sheet of the bundle

    Returns:
        E-coefficients of ν (..., m) and the normalisations μ (...)
    """
    wedge = wedge_coefficients(np.concatenate([d1, fiber], axis=-2))
    # df(e_1)∧…∧df(e_n) = (∂_1 f∧…∧∂_n f) / θ for a θ-unimodular frame
    unimodular = wedge / theta_value[..., None]
    zeta_coeffs = np.linalg.solve(S.zeta.T, unimodular[..., None])[..., 0]
    radius = np.linalg.norm(zeta_coeffs, axis=-1)
    if np.any(radius == 0):
        raise DegenerateError("Gauss map wedge vanishes: tangent and fiber vectors are dependent")
    mu = 1 / radius
    return orientation * mu[..., None] * unimodular, mu


def _default_fiber(fd: FundamentalData) -> np.ndarray:
    return fd.xi[..., :-1, :]


def gauss_map(
    jet: ImmersionJet,
    fd: FundamentalData,
    S: UnitEllipsoid,
    fiber: np.ndarray | None = None,
    orientation: int = 1,
) -> GaussValue:
    """ν at one point for one fiber element

    For codimension 1 the fiber is empty and ν = ±μ·df(e_1)∧…∧df(e_n).

    Args:
        jet: Jet at the point
        fd: Its decomposition
        S: The unit ellipsoid
        fiber: The r - 1 vectors of N spanning the fiber element; defaults to ξ_1, …, ξ_{r-1}
        orientation: +1 or -1
    """
    if orientation not in (1, -1):
        raise InputError(f"Orientation must be +1 or -1, got {orientation}")
    fiber = _default_fiber(fd) if fiber is None else np.asarray(fiber, dtype=float)
    if fiber.shape != (fd.xi.shape[-2] - 1, jet.m):
        raise InputError(f"Fiber element needs {fd.xi.shape[-2] - 1} vectors of dimension {jet.m}")
    if fd.theta_value == 0:
        raise DegenerateError("Induced volume θ vanishes; no θ-unimodular frame exists")
    coeffs, mu = gauss_coefficients(jet.d1, fiber, np.asarray(fd.theta_value), S, orientation)
    return GaussValue(phi=MultiCovector(coeffs), mu=float(mu), orientation=orientation)


def lipschitz_killing(fd: FundamentalData, gauss: GaussValue) -> float:
    """G = (-1)^n det[h̃_ν(α(∂_i, ∂_j))] / θ²"""
    matrix = heights(gauss.phi.coeffs, fd.alpha_vectors)
    n = matrix.shape[-1]
    if fd.theta_value == 0:
        raise DegenerateError("Induced volume θ vanishes")
    return float((-1) ** n * np.linalg.det(matrix) / fd.theta_value**2)


def lipschitz_killing_batch(
    jets: ImmersionJet, fd: FundamentalData, S: UnitEllipsoid, orientation: int = 1,
) -> np.ndarray:
    """G on both sheets' chosen orientation for a batch, with the default fiber"""
    coeffs, _ = gauss_coefficients(jets.d1, _default_fiber(fd), fd.theta_value, S, orientation)
    matrix = heights(coeffs[..., None, None, :], fd.alpha_vectors)
    n = matrix.shape[-1]
    return (-1) ** n * np.linalg.det(matrix) / fd.theta_value**2


def _sphere_coordinates(
    chart: Chart, frame: TransversalFrame, S: UnitEllipsoid, u: np.ndarray,
) -> np.ndarray:
    """Unit ζ-coefficients of ν at parameter points"""
    jets = chart.evaluate(u)
    fd = decompose_batch(jets, frame)
    coeffs, _ = gauss_coefficients(jets.d1, _default_fiber(fd), fd.theta_value, S)
    return np.linalg.solve(S.zeta.T, coeffs[..., None])[..., 0]


def gauss_jacobian_rank(
    chart: Chart,
    u: np.ndarray,
    frame: TransversalFrame,
    S: UnitEllipsoid,
    step: float | None = None,
) -> np.ndarray | float:
    """Smallest singular value of dν at parameter points

    The derivative of the ζ-coefficient unit vector is projected onto an orthonormal basis of
    the tangent space of the coefficient sphere.

    Args:
        chart: Chart of the immersion
        u: One parameter point (n,) or a batch (..., n)
        frame: Transversal frame, of rank 1
        S: The unit ellipsoid
        step: Central-difference step; defaults to GAUSS_STEP times the domain diameter

    Raises:
        PathologyError: The step is too small to resolve dν
    """
    if frame.rank != 1:
        raise InputError("The Gauss map Jacobian is only computed in codimension 1")
    u = np.asarray(u, dtype=float)
    h = GAUSS_STEP * chart.domain_diameter if step is None else step
    if h < MIN_RELATIVE_STEP * chart.domain_diameter:
        raise PathologyError(f"Gauss map step {h} underflows")

    n = chart.n
    a = _sphere_coordinates(chart, frame, S, u)
    shifts = h * np.eye(n)
    plus = _sphere_coordinates(chart, frame, S, u[..., None, :] + shifts)
    minus = _sphere_coordinates(chart, frame, S, u[..., None, :] - shifts)
    derivative = (plus - minus) / (2 * h)

    # Rows of the SVD's V beyond the first span the tangent space at a
    _, _, vt = np.linalg.svd(a[..., None, :])
    tangent = np.swapaxes(vt[..., 1:, :], -1, -2)
    sigma = np.linalg.svd(derivative @ tangent, compute_uv=False)[..., -1]
    return float(sigma) if sigma.ndim == 0 else sigma


def gauss_scan(
    atlas: Atlas,
    frame: TransversalFrame,
    S: UnitEllipsoid,
    chart_id: str,
    resolution: int | Sequence[int] = 64,
) -> xr.Dataset:
    """G on both sheets and σ_min(dν) over a regular grid of one chart of a surface

    Returns:
        Dataset over dims (u, v) with variables G, G_minus and sigma_min
    """
    chart = atlas.chart(chart_id)
    if chart.n != 2:
        raise InputError("gauss_scan expects a surface chart")
    counts = [resolution] * 2 if isinstance(resolution, int) else list(resolution)
    grid = chart.grid(counts)

    jets = chart.evaluate(grid)
    fd = decompose_batch(jets, frame)
    g_plus = lipschitz_killing_batch(jets, fd, S, orientation=1)
    g_minus = lipschitz_killing_batch(jets, fd, S, orientation=-1)
    sigma = gauss_jacobian_rank(chart, grid, frame, S)

    logger.info(f"Scanned {grid.shape[0] * grid.shape[1]} points of chart {chart_id}")
    return xr.Dataset(
        data_vars={
            "G": (("u", "v"), g_plus),
            "G_minus": (("u", "v"), g_minus),
            "sigma_min": (("u", "v"), sigma),
        },
        coords={"u": grid[:, 0, 0], "v": grid[0, :, 1]},
        attrs={
            "atlas": atlas.name, "chart": chart_id, "frame": frame.id, "ellipsoid": S.identifier,
        },
    )
