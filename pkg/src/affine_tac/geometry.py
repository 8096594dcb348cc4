"""Affine hulls, codimension reduction and convexity certificates

An immersion whose image spans only an affine subspace L = b + L′ can be re-expressed in L.
With a fixed vector ξ ∉ L′ the volume element ω_L(X_1, …, X_{m-1}) = ω(X_1, …, X_{m-1}, ξ)
makes L an equiaffine space, and height functions restrict as h^L_ψ(v) = -h̃_{ψ∧ξ}(v).
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, Field

from affine_tac import consts
from affine_tac.config import RunConfig
from affine_tac.curvature import gauss_coefficients
from affine_tac.equiaffine import (
    EquiaffineReport,
    TransversalFrame,
    check_equiaffine,
    decompose_batch,
)
from affine_tac.exceptions import DegenerateError, InputError
from affine_tac.exterior import (
    AffineSpace,
    MultiCovector,
    UnitEllipsoid,
    heights,
    wedge_coefficients,
)
from affine_tac.manifold import Atlas, ImmersionJet, affine_image, sample_parameters
from affine_tac.tac import CertificateReport, certify_minimal

logger = logging.getLogger(__name__)

# Rows of the supporting-hyperplane sweep evaluated at once
SUPPORT_CHUNK = 512


@dataclass(frozen=True, eq=False)
class HullInfo:
    """Affine hull of the sampled image

    Attributes:
        dimension: dim L
        basis: Orthonormal basis of L′ as columns, (m, dimension)
        base_point: A point b of L
        singular_values: Singular values of the centred samples
    """

    dimension: int
    basis: np.ndarray
    base_point: np.ndarray
    singular_values: np.ndarray


def affine_hull_dim(
    atlas: Atlas, resolution: int = 32, rank_tol: float = consts.hull_rank_tol,
) -> HullInfo:
    """Dimension of the affine hull of f(M) from sampled points

    Raises:
        InputError: Too few samples or all samples coincide
    """
    points = atlas.sample_points(resolution)
    m = points.shape[1]
    if len(points) < m + 1:
        raise InputError(f"Need at least {m + 1} samples for the affine hull, got {len(points)}")
    base = points.mean(axis=0)
    _, sigma, vt = np.linalg.svd(points - base, full_matrices=False)
    if sigma[0] == 0:
        raise InputError("All sampled points coincide")
    dimension = int(np.sum(sigma > rank_tol * sigma[0]))
    logger.info(f"Affine hull of {atlas.name} has dimension {dimension} in R^{m}")
    return HullInfo(dimension, vt[:dimension].T, base, sigma)


@dataclass(frozen=True, eq=False)
class ReducedImmersion:
    """An immersion re-expressed in an affine hyperplane L = b + L′

    L-coordinates y satisfy x = b + W y. The columns w_i of W satisfy det[W | ξ] = 1, so the
    standard volume in y-coordinates is ω_L.

    Attributes:
        atlas: The immersion in L-coordinates
        frame: The reduced frame (N ∩ L′, θ_L^⊥), in L-coordinates
        space: L with ω_L
        xi: The vector ξ ∉ L′
        xi_index: Position of ξ in the original frame
        basis: W, (m, m-1)
        base_point: b
        equiaffine: ∇θ check of the reduced immersion
        parent: Reduction this one was applied to, if any
    """

    atlas: Atlas
    frame: TransversalFrame
    space: AffineSpace
    xi: np.ndarray
    xi_index: int
    basis: np.ndarray
    base_point: np.ndarray
    equiaffine: EquiaffineReport
    parent: "ReducedImmersion | None" = None

    @property
    def dim(self) -> int:
        return self.space.dim

    def to_ambient(self, y: np.ndarray) -> np.ndarray:
        """Ambient points of L-coordinates, through every reduction step"""
        x = self.base_point + np.asarray(y, dtype=float) @ self.basis.T
        return x if self.parent is None else self.parent.to_ambient(x)

    def to_ambient_vector(self, y: np.ndarray) -> np.ndarray:
        """The vector W y of L′"""
        return np.asarray(y, dtype=float) @ self.basis.T

    def coordinates(self, x: np.ndarray) -> np.ndarray:
        """L-coordinates W⁺ (x - b)"""
        return (np.asarray(x, dtype=float) - self.base_point) @ np.linalg.pinv(self.basis).T


def _choose_xi(
    xi_samples: np.ndarray, hull_basis: np.ndarray,
) -> tuple[int, np.ndarray]:
    """Pick the frame vector with the largest component orthogonal to the hull directions"""
    projector = np.eye(hull_basis.shape[0]) - hull_basis @ hull_basis.T
    norms = np.linalg.norm(xi_samples, axis=-1)
    orthogonal = np.linalg.norm(xi_samples @ projector, axis=-1) / norms
    worst = orthogonal.min(axis=0)
    k = int(np.argmax(worst))
    if worst[k] < 1e-8:
        raise DegenerateError(
            f"No frame vector is transversal to the hull: orthogonal parts {worst.tolist()}",
        )
    return k, xi_samples[0, k]


def reduce(
    atlas: Atlas,
    frame: TransversalFrame,
    hull: HullInfo,
    resolution: int = 8,
) -> ReducedImmersion:
    """Re-express an immersion in an affine hyperplane containing its hull

    ξ is the frame vector, evaluated at the first sample, whose smallest component orthogonal
    to the hull over the samples is largest. The reduced frame is
    ξ'_j = ξ_j - (ℓ(ξ_j) / ℓ(ξ_k)) ξ_k for j ≠ k, with ℓ vanishing on L′, and θ_L^⊥ makes the
    induced volume of the reduced immersion equal to the original θ.

    Raises:
        InputError: The hull is already full-dimensional
        DegenerateError: No frame vector is transversal to the hull
    """
    m = atlas.m
    if hull.dimension >= m:
        raise InputError(f"{atlas.name} already spans R^{m}; nothing to reduce")
    if frame.rank < 2:
        raise DegenerateError("A frame of rank 1 leaves no transversal directions after reduction")

    jets = [
        chart.evaluate(chart.grid([resolution] * chart.n).reshape(-1, chart.n))
        for chart in atlas.charts
    ]
    xi_samples = np.concatenate([frame.evaluate(j)[0] for j in jets])
    k, xi = _choose_xi(xi_samples, hull.basis)

    # L′ = hull directions ⊕ the complement orthogonal to them and to ξ
    xi_perp = xi - hull.basis @ (hull.basis.T @ xi)
    _, _, vt = np.linalg.svd(np.column_stack([hull.basis, xi_perp]).T)
    complement = vt[hull.dimension + 1:].T
    orthonormal = np.column_stack([hull.basis, complement])
    volume = np.linalg.det(np.column_stack([orthonormal, xi]))
    basis = orthonormal.copy()
    basis[:, 0] /= volume
    pinv = np.linalg.pinv(basis)
    base = hull.base_point

    # ℓ(x) = (ξ⊥ · x) / |ξ⊥|² vanishes on L′ with ℓ(ξ) = 1
    ell = xi_perp / float(xi_perp @ xi_perp)

    def ambient_jets(reduced: ImmersionJet) -> ImmersionJet:
        return ImmersionJet(
            base + reduced.point @ basis.T, reduced.d1 @ basis.T, reduced.d2 @ basis.T,
        )

    def reduced_vectors(reduced: ImmersionJet) -> np.ndarray:
        original = frame.evaluate(ambient_jets(reduced))[0]
        ratio = (original @ ell) / (original[..., k, :] @ ell)[..., None]
        projected = original - ratio[..., None] * original[..., k, None, :]
        keep = [j for j in range(frame.rank) if j != k]
        return projected[..., keep, :] @ pinv.T

    def reduced_theta_perp(reduced: ImmersionJet) -> np.ndarray:
        jets_x = ambient_jets(reduced)
        original, theta_perp = frame.evaluate(jets_x)
        theta = np.linalg.det(np.concatenate([jets_x.d1, original], axis=-2)) / theta_perp
        lifted = reduced_vectors(reduced) @ basis.T
        lifted_volume = np.linalg.det(
            np.concatenate(
                [jets_x.d1, lifted, np.broadcast_to(xi, lifted[..., :1, :].shape)], axis=-2,
            ),
        )
        return lifted_volume / theta

    reduced_atlas = Atlas(
        charts=tuple(affine_image(chart, pinv, base) for chart in atlas.charts),
        name=f"{atlas.name}|L",
        betti=atlas.betti,
        metadata=atlas.metadata,
    )
    reduced_frame = TransversalFrame(
        id=f"{frame.id}|L",
        vectors=reduced_vectors,
        rank=frame.rank - 1,
        theta_perp=reduced_theta_perp,
    )
    equiaffine = check_equiaffine(reduced_atlas, reduced_frame, resolution=resolution)
    logger.info(
        f"Reduced {atlas.name} to R^{m - 1} with xi = frame vector {k}; "
        f"max |∇θ| = {equiaffine.max_nabla_theta:.3e}",
    )
    return ReducedImmersion(
        atlas=reduced_atlas,
        frame=reduced_frame,
        space=AffineSpace.standard(m - 1),
        xi=xi,
        xi_index=k,
        basis=basis,
        base_point=base,
        equiaffine=equiaffine,
    )


def reduce_to_hull(
    atlas: Atlas,
    frame: TransversalFrame,
    hull: HullInfo | None = None,
    resolution: int = 32,
) -> ReducedImmersion:
    """Reduce repeatedly until the ambient dimension equals the hull dimension"""
    hull = hull or affine_hull_dim(atlas, resolution)
    reduced = reduce(atlas, frame, hull)
    while reduced.dim > hull.dimension:
        inner_hull = affine_hull_dim(reduced.atlas, resolution)
        step = reduce(reduced.atlas, reduced.frame, inner_hull)
        reduced = ReducedImmersion(
            atlas=step.atlas,
            frame=step.frame,
            space=step.space,
            xi=step.xi,
            xi_index=step.xi_index,
            basis=step.basis,
            base_point=step.base_point,
            equiaffine=step.equiaffine,
            parent=reduced,
        )
    return reduced


def lift_multicovector(reduced: ReducedImmersion, psi: MultiCovector) -> MultiCovector:
    """ψ ∧ ξ as an element of ∧^{m-1}R^m, linear in ψ ∈ ∧^{m-2}L′

    ψ is given by its coefficients in the basis w_1∧…∧ŵ_i∧…∧w_{m-1} of the L-coordinates.
    """
    basis = reduced.basis
    m = basis.shape[0]
    if psi.dim != m - 1:
        raise InputError(f"Expected a multicovector of L with dimension {m - 1}, got {psi.dim}")
    rows = []
    for i in range(m - 1):
        vectors = [basis[:, j] for j in range(m - 1) if j != i] + [reduced.xi]
        rows.append(wedge_coefficients(np.array(vectors)))
    return MultiCovector(psi.coeffs @ np.array(rows))


def reduced_height(reduced: ReducedImmersion, psi: MultiCovector, y: np.ndarray) -> np.ndarray:
    """h^L_ψ at L-coordinates y, using ω_L"""
    if psi.dim != reduced.dim:
        raise InputError(
            f"Expected a multicovector of L with dimension {reduced.dim}, got {psi.dim}",
        )
    return heights(psi.coeffs, y)


class Violation(BaseModel):
    """The sample whose tangent hyperplane is furthest from supporting"""

    chart_id: str = Field(..., title="Chart")
    parameter: list[float] = Field(..., title="Parameter")
    point: list[float] = Field(..., title="Point")
    magnitude: float = Field(
        ..., title="Magnitude", description="Smaller of the two opposing height extremes",
    )


class ConvexityReport(BaseModel):
    """Supporting-hyperplane test over all sample pairs"""

    convex: bool = Field(..., title="Convex", description="Every tangent hyperplane supports")
    supporting_fraction: float = Field(
        ..., title="Supporting fraction",
        description="Share of samples with a supporting hyperplane",
    )
    worst_violation: Violation | None = Field(None, title="Worst violation")
    sample_count: int = Field(..., title="Sample count")


def convexity_certify(
    atlas: Atlas,
    frame: TransversalFrame,
    S: UnitEllipsoid,
    resolution: int = 32,
    supp_tol: float = consts.supp_tol,
) -> ConvexityReport:
    """Check that the tangent hyperplane at every sample supports f(M)

    Raises:
        InputError: The immersion is not a hypersurface
    """
    if frame.rank != 1 or atlas.m != atlas.n + 1:
        raise InputError("Convexity is certified for hypersurfaces; reduce the codimension first")

    labels, params, points, normals = [], [], [], []
    samples = sample_parameters(atlas, resolution)
    for chart in atlas.charts:
        u = np.array([p for chart_id, p in samples if chart_id == chart.id])
        if len(u) == 0:
            continue
        jets = chart.evaluate(u)
        fd = decompose_batch(jets, frame)
        coeffs, _ = gauss_coefficients(jets.d1, fd.xi[..., :0, :], fd.theta_value, S)
        labels.extend([chart.id] * len(u))
        params.append(u)
        points.append(jets.point)
        normals.append(coeffs)
    params_all = np.concatenate(params)
    points_all = np.concatenate(points)
    normals_all = np.concatenate(normals)

    supporting = np.zeros(len(points_all), dtype=bool)
    opposing = np.zeros(len(points_all))
    for start in range(0, len(points_all), SUPPORT_CHUNK):
        stop = start + SUPPORT_CHUNK
        offsets = points_all[None, :, :] - points_all[start:stop, None, :]
        s = heights(normals_all[start:stop, None, :], offsets)
        norm = np.linalg.norm(normals_all[start:stop], axis=-1)
        tol = supp_tol * atlas.diameter * norm
        lo, hi = s.min(axis=1), s.max(axis=1)
        supporting[start:stop] = (lo >= -tol) | (hi <= tol)
        opposing[start:stop] = np.minimum(-lo, hi)

    worst = None
    if not np.all(supporting):
        k = int(np.argmax(np.where(supporting, -np.inf, opposing)))
        worst = Violation(
            chart_id=labels[k],
            parameter=params_all[k].tolist(),
            point=points_all[k].tolist(),
            magnitude=float(opposing[k]),
        )
    report = ConvexityReport(
        convex=bool(np.all(supporting)),
        supporting_fraction=float(np.mean(supporting)),
        worst_violation=worst,
        sample_count=len(points_all),
    )
    logger.info(f"Convexity of {atlas.name}: {report.convex} ({report.supporting_fraction:.4f})")
    return report


class VerdictRecord(BaseModel):
    """Both sides of: τ = 2 iff f(M) is a convex hypersurface of an (n+1)-plane"""

    atlas: str = Field(..., title="Atlas")
    minimal: bool = Field(..., title="Minimal", description="Sampling certificate of τ = 2")
    hull_dim: int = Field(..., title="Hull dimension")
    n: int = Field(..., title="Dimension of M")
    convex: bool = Field(..., title="Convex")
    agreement: bool = Field(
        ..., title="Agreement", description="Both sides of the equivalence agree",
    )
    reduced: bool = Field(..., title="Reduced", description="Whether the codimension was reduced")
    tau_preserved: bool | None = Field(
        None, title="τ preserved",
        description="τ before and after reduction agree within three standard errors; "
        "only asserted when minimality held before reduction",
    )
    certificate: CertificateReport = Field(..., title="Certificate")
    reduced_certificate: CertificateReport | None = Field(None, title="Reduced certificate")
    convexity: ConvexityReport | None = Field(None, title="Convexity")


def main_theorem_check(
    atlas: Atlas,
    frame: TransversalFrame,
    S: UnitEllipsoid,
    config: RunConfig | None = None,
) -> VerdictRecord:
    """Evaluate both sides of the equivalence and record whether they agree"""
    config = config or RunConfig()
    certificate = certify_minimal(
        atlas, frame, S, config.sample_count, config.seed,
        config.search, config.tolerances, config.num_workers,
    )
    hull = affine_hull_dim(atlas, config.sample_resolution, config.tolerances.hull_rank_tol)

    target, target_frame = atlas, frame
    reduced_certificate = None
    tau_preserved = None
    if hull.dimension < atlas.m:
        reduced = reduce_to_hull(atlas, frame, hull, config.sample_resolution)
        target, target_frame = reduced.atlas, reduced.frame
        reduced_certificate = certify_minimal(
            target, target_frame, UnitEllipsoid.standard(reduced.dim),
            config.sample_count, config.seed, config.search, config.tolerances,
            config.num_workers,
        )
        if certificate.minimal:
            a, b = certificate.report, reduced_certificate.report
            tau_preserved = bool(
                abs(a.tau_estimate - b.tau_estimate) <= 3 * np.hypot(a.stderr, b.stderr),
            )

    convexity = None
    convex = False
    if hull.dimension == atlas.n + 1:
        target_S = S if target is atlas else UnitEllipsoid.standard(target.m)
        convexity = convexity_certify(
            target, target_frame, target_S, config.sample_resolution, config.tolerances.supp_tol,
        )
        convex = convexity.convex

    agreement = certificate.minimal == (hull.dimension == atlas.n + 1 and convex)
    record = VerdictRecord(
        atlas=atlas.name,
        minimal=certificate.minimal,
        hull_dim=hull.dimension,
        n=atlas.n,
        convex=convex,
        agreement=agreement,
        reduced=target is not atlas,
        tau_preserved=tau_preserved,
        certificate=certificate,
        reduced_certificate=reduced_certificate,
        convexity=convexity,
    )
    logger.info(
        f"Verdict on {atlas.name}: minimal={record.minimal}, hull={record.hull_dim}, "
        f"convex={record.convex}, agreement={record.agreement}",
    )
    return record


def critical_points_agree(
    first: Sequence[np.ndarray], second: Sequence[np.ndarray], radius: float,
) -> bool:
    """Whether two sets of ambient points match one to one within radius"""
    if len(first) != len(second):
        return False
    remaining = [np.asarray(p) for p in second]
    for p in first:
        distances = [np.linalg.norm(p - q) for q in remaining]
        if not distances or min(distances) >= radius:
            return False
        remaining.pop(int(np.argmin(distances)))
    return True
