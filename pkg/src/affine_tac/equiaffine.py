"""Transversal frames and the Gauss decomposition of second derivatives

For an immersion f with transversal frame ξ_1, …, ξ_r the second derivatives split as

    ∂_i∂_j f = Σ_k Γ^k_ij ∂_k f + Σ_a α^a_ij ξ_a

which yields the induced connection ∇ and the affine fundamental form α. The induced volume
is θ(∂_1, …, ∂_n) = det[∂_1 f … ∂_n f ξ_1 … ξ_r] / θ^⊥(ξ_1, …, ξ_r).
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, Field

from affine_tac.exceptions import DegenerateError, InputError
from affine_tac.exterior import coefficient_signs, wedge_coefficients
from affine_tac.manifold import Atlas, ImmersionJet

logger = logging.getLogger(__name__)

FrameFunction = Callable[[ImmersionJet], np.ndarray]
ScalarField = Callable[[ImmersionJet], np.ndarray]

# Reciprocal condition number below which [df | ξ] counts as singular
TRANSVERSALITY_TOL = 1e-12

# Default step of the ∇θ stencil, relative to the chart domain diameter
THETA_STEP = 1e-4


@dataclass(frozen=True, eq=False)
class TransversalFrame:
    """A transversal frame (ξ_1, …, ξ_r) with the volume element θ^⊥

    Args:
        id: Label used in reports
        vectors: Maps jets (...) to frame vectors (..., r, m)
        rank: The codimension r
        theta_perp: Value of θ^⊥(ξ_1, …, ξ_r) as a function of the jet; constant 1 if None
    """

    id: str
    vectors: FrameFunction
    rank: int
    theta_perp: ScalarField | None = None

    def evaluate(self, jets: ImmersionJet) -> tuple[np.ndarray, np.ndarray]:
        """Frame vectors and θ^⊥ at a batch of jets"""
        xi = np.asarray(self.vectors(jets), dtype=float)
        if xi.shape[-2:] != (self.rank, jets.m):
            raise InputError(
                f"Frame {self.id} returned vectors of shape {xi.shape[-2:]}, "
                f"expected {(self.rank, jets.m)}",
            )
        if self.theta_perp is None:
            theta_perp = np.ones(jets.point.shape[:-1])
        else:
            theta_perp = np.asarray(self.theta_perp(jets), dtype=float)
        return xi, theta_perp


def normal_covector(d1: np.ndarray) -> np.ndarray:
    """The vector c with c · v = det[d1 | v]; it is Euclidean-normal to the tangent space"""
    m = d1.shape[-1]
    return coefficient_signs(m) * wedge_coefficients(d1)


def euclidean_normal_frame(
    center: Sequence[float] | None = None,
    orientation: float = 1.0,
    axes: Sequence[int] | None = None,
) -> TransversalFrame:
    """The Euclidean unit normal of a hypersurface, θ^⊥ = 1

    Args:
        center: If given, the normal is oriented to point towards this point
        orientation: Sign applied when no center is given; +1 makes det[df | ξ] positive
        axes: Restrict to the coordinate subspace spanned by these axes; the immersion must
            be a hypersurface of it
    """

    def vectors(jets: ImmersionJet) -> np.ndarray:
        idx = list(range(jets.m)) if axes is None else list(axes)
        c = normal_covector(jets.d1[..., idx])
        norm = np.linalg.norm(c, axis=-1, keepdims=True)
        if np.any(norm == 0):
            raise DegenerateError("Tangent vectors are linearly dependent; no normal exists")
        c = c / norm
        if center is None:
            c = orientation * c
        else:
            offset = jets.point[..., idx] - np.asarray(center, dtype=float)[idx]
            inward = -np.sign(np.sum(c * offset, axis=-1, keepdims=True))
            c = np.where(inward == 0, 1.0, inward) * c
        xi = np.zeros(c.shape[:-1] + (jets.m,))
        xi[..., idx] = c
        return xi[..., None, :]

    label = "euclidean_normal" if axes is None else f"euclidean_normal{list(axes)}"
    return TransversalFrame(id=label, vectors=vectors, rank=1)


def position_frame(center: Sequence[float] | None = None, sign: float = 1.0) -> TransversalFrame:
    """The centro-affine frame ξ = ±(f - center)"""

    def vectors(jets: ImmersionJet) -> np.ndarray:
        origin = 0.0 if center is None else np.asarray(center, dtype=float)
        return sign * (jets.point - origin)[..., None, :]

    return TransversalFrame(id="position", vectors=vectors, rank=1)


def constant_frame(vectors: Sequence[Sequence[float]]) -> TransversalFrame:
    """A frame of constant vectors"""
    fixed = np.atleast_2d(np.asarray(vectors, dtype=float))

    def frame(jets: ImmersionJet) -> np.ndarray:
        return np.broadcast_to(fixed, jets.point.shape[:-1] + fixed.shape)

    return TransversalFrame(id="constant", vectors=frame, rank=fixed.shape[0])


def stacked_frame(*frames: TransversalFrame) -> TransversalFrame:
    """Concatenate frames, with θ^⊥ the product of the parts"""
    if not frames:
        raise InputError("stacked_frame needs at least one frame")

    def vectors(jets: ImmersionJet) -> np.ndarray:
        return np.concatenate([frame.evaluate(jets)[0] for frame in frames], axis=-2)

    def theta_perp(jets: ImmersionJet) -> np.ndarray:
        return np.prod([frame.evaluate(jets)[1] for frame in frames], axis=0)

    return TransversalFrame(
        id="+".join(frame.id for frame in frames),
        vectors=vectors,
        rank=sum(frame.rank for frame in frames),
        theta_perp=theta_perp,
    )


@dataclass(frozen=True, eq=False)
class FundamentalData:
    """Output of the Gauss decomposition, possibly batched

    Attributes:
        christoffels: Γ^k_ij stored at [..., k, i, j]
        alpha: ξ-coefficients of α(∂_i, ∂_j) stored at [..., i, j, a]
        theta_value: θ(∂_1, …, ∂_n)
        xi: The frame vectors used, (..., r, m)
        residual: Largest residual of the linear solve
    """

    christoffels: np.ndarray
    alpha: np.ndarray
    theta_value: np.ndarray
    xi: np.ndarray
    residual: float

    @property
    def alpha_vectors(self) -> np.ndarray:
        """α(∂_i, ∂_j) as ambient vectors, (..., n, n, m)"""
        return np.einsum("...ija,...am->...ijm", self.alpha, self.xi)

    def alpha_asymmetry(self) -> float:
        return float(np.max(np.abs(self.alpha - np.swapaxes(self.alpha, -2, -3)), initial=0.0))

    def __getitem__(self, index: int | slice | np.ndarray) -> "FundamentalData":
        return FundamentalData(
            self.christoffels[index],
            self.alpha[index],
            self.theta_value[index],
            self.xi[index],
            self.residual,
        )


def decompose(
    jet: ImmersionJet, xi: np.ndarray, theta_perp: np.ndarray | float = 1.0,
) -> FundamentalData:
    """Split second derivatives into tangential and transversal parts

    Solves [d1ᵀ | ξᵀ] c = ∂_i∂_j f for every (i, j). Works on single jets and on batches.

    Args:
        jet: Jet of f
        xi: Frame vectors at the same points, (..., r, m)
        theta_perp: θ^⊥(ξ_1, …, ξ_r)

    Raises:
        DegenerateError: [df | ξ] is singular
    """
    n, m = jet.n, jet.m
    xi = np.asarray(xi, dtype=float)
    r = xi.shape[-2]
    if n + r != m:
        raise InputError(f"{n} tangent and {r} transversal vectors cannot span R^{m}")

    # Columns are ∂_1 f, …, ∂_n f, ξ_1, …, ξ_r
    basis = np.swapaxes(np.concatenate([jet.d1, xi], axis=-2), -1, -2)
    inv_cond = 1 / np.linalg.cond(basis)
    if np.any(~np.isfinite(inv_cond) | (inv_cond < TRANSVERSALITY_TOL)):
        raise DegenerateError("Frame is not transversal: [df | ξ] is singular")

    rhs = np.swapaxes(jet.d2.reshape(jet.d2.shape[:-3] + (n * n, m)), -1, -2)
    coeffs = np.linalg.solve(basis, rhs)
    residual = float(np.max(np.abs(basis @ coeffs - rhs), initial=0.0))

    coeffs = np.swapaxes(coeffs, -1, -2).reshape(jet.d2.shape[:-3] + (n, n, m))
    christoffels = np.moveaxis(coeffs[..., :n], -1, -3)
    alpha = coeffs[..., n:]
    theta_value = np.linalg.det(basis) / theta_perp
    return FundamentalData(christoffels, alpha, np.asarray(theta_value), xi, residual)


def decompose_batch(jets: ImmersionJet, frame: TransversalFrame) -> FundamentalData:
    """Evaluate the frame and decompose a batch of jets"""
    xi, theta_perp = frame.evaluate(jets)
    return decompose(jets, xi, theta_perp)


def unimodular_rescale(fd: FundamentalData) -> np.ndarray | float:
    """θ², the divisor turning chart determinants into θ-unimodular ones

    Raises:
        DegenerateError: θ vanishes
    """
    theta = np.asarray(fd.theta_value)
    if np.any(theta == 0):
        raise DegenerateError("Induced volume θ vanishes; no θ-unimodular frame exists")
    divisor = theta**2
    return float(divisor) if divisor.ndim == 0 else divisor


def classical_gaussian_curvature(jet: ImmersionJet) -> np.ndarray:
    """Euclidean Gaussian curvature of a surface in R³"""
    if jet.n != 2 or jet.m != 3:
        raise InputError("Gaussian curvature needs a surface in R^3")
    normal = normal_covector(jet.d1)
    normal = normal / np.linalg.norm(normal, axis=-1, keepdims=True)
    first = jet.d1 @ np.swapaxes(jet.d1, -1, -2)
    second = np.einsum("...ijm,...m->...ij", jet.d2, normal)
    return np.linalg.det(second) / np.linalg.det(first)


class EquiaffineReport(BaseModel):
    """Largest violation of ∇θ = 0 over the samples of an atlas"""

    frame: str = Field(..., title="Frame", description="Identifier of the transversal frame")
    max_nabla_theta: float = Field(
        ..., title="Max |∇θ|", description="Largest |(∇_∂k θ)(∂_1, …, ∂_n)| over all samples",
    )
    per_chart: dict[str, float] = Field(
        ..., title="Per chart", description="Largest |∇θ| on each chart",
    )
    sample_count: int = Field(..., title="Sample count", description="Number of samples checked")


def nabla_theta(
    chart_jets: Callable[[np.ndarray], ImmersionJet],
    frame: TransversalFrame,
    u: np.ndarray,
    step: float,
) -> np.ndarray:
    """(∇_∂k θ)(∂_1, …, ∂_n) at parameter points u (..., n), shape (..., n)

    ∂_k θ comes from a fourth-order central stencil; Γ from the decomposition at u.
    """
    n = u.shape[-1]
    fd = decompose_batch(chart_jets(u), frame)
    trace = np.einsum("...iki->...k", fd.christoffels)

    shifts = step * np.eye(n)
    stencil = {2: -1.0, 1: 8.0, -1: -8.0, -2: 1.0}
    d_theta = np.zeros(u.shape)
    for factor, weight in stencil.items():
        shifted = u[..., None, :] + factor * shifts
        d_theta += weight * decompose_batch(chart_jets(shifted), frame).theta_value
    d_theta /= 12 * step
    return d_theta - trace * fd.theta_value[..., None]


def check_equiaffine(
    atlas: Atlas,
    frame: TransversalFrame,
    resolution: int | Sequence[int] = 16,
    step: float | None = None,
) -> EquiaffineReport:
    """Largest |∇θ| over a regular sample of every chart

    Args:
        atlas: The immersion
        frame: Transversal frame to test
        resolution: Grid points per parameter axis
        step: Stencil step; defaults to THETA_STEP times each chart's domain diameter
    """
    per_chart = {}
    count = 0
    for chart in atlas.charts:
        counts = [resolution] * chart.n if isinstance(resolution, int) else list(resolution)
        grid = chart.grid(counts).reshape(-1, chart.n)
        h = step if step is not None else THETA_STEP * chart.domain_diameter
        violation = nabla_theta(chart.evaluate, frame, grid, h)
        per_chart[chart.id] = float(np.max(np.abs(violation)))
        count += len(grid)

    report = EquiaffineReport(
        frame=frame.id,
        max_nabla_theta=max(per_chart.values()),
        per_chart=per_chart,
        sample_count=count,
    )
    logger.info(
        f"Equiaffine check on {atlas.name} with frame {frame.id}: {report.max_nabla_theta:.3e}",
    )
    return report
