"""Total absolute curvature by averaging critical-point counts over S

τ_S(f) equals the average number of critical points of Morse height functions h_φ, φ ∈ S,
under the normalised measure of S. Draws whose height function fails the Morse test are
rejected and replaced by the next draw of the stream.
"""

import logging
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, Field

from affine_tac.config import SearchConfig, Tolerances
from affine_tac.equiaffine import TransversalFrame, check_equiaffine
from affine_tac.exceptions import InputError, PathologyError
from affine_tac.exterior import MultiCovector, UnitEllipsoid, draw_ellipsoid
from affine_tac.manifold import Atlas
from affine_tac.morse import MorseCount, PhiDiagnostics, SeedGrid, find_critical_points, index_sum

logger = logging.getLogger(__name__)

DiagnosticsSink = Callable[[PhiDiagnostics], None]


class TacReport(BaseModel):
    """Monte-Carlo estimate of the total absolute curvature"""

    atlas: str = Field(..., title="Atlas", description="Name of the immersion")
    tau_estimate: float = Field(..., title="τ estimate", description="Mean critical-point count")
    stderr: float = Field(..., title="Standard error", description="Monte-Carlo standard error")
    histogram: dict[int, int] = Field(
        ..., title="Histogram", description="Number of accepted draws per critical-point count",
    )
    non_morse_rejections: int = Field(
        ..., title="Rejections", description="Draws rejected by the Morse test",
    )
    sample_count: int = Field(..., title="Sample count", description="Accepted draws")
    ellipsoid: str = Field(..., title="Ellipsoid", description="Identifier of the ζ-basis")
    frame: str = Field(..., title="Frame", description="Identifier of the transversal frame")
    seed: int = Field(..., title="Seed", description="Seed of the φ stream")
    index_sum_violations: int = Field(
        0, title="Index sum violations",
        description="Accepted draws whose Σ(-1)^index differs from χ(M), when χ is known",
    )

    @property
    def rejection_rate(self) -> float:
        total = self.sample_count + self.non_morse_rejections
        return self.non_morse_rejections / total if total else 0.0


class Witness(BaseModel):
    """A direction whose height function has more than two critical points"""

    phi: list[float] = Field(..., title="Phi", description="E-coefficients of the direction")
    count: int = Field(..., title="Count", description="Number of critical points")
    indices: list[int] = Field(..., title="Indices", description="Morse index of each point")
    points: list[list[float]] = Field(..., title="Points", description="Ambient critical points")


class CertificateReport(BaseModel):
    """Sampling certificate of τ = 2"""

    minimal: bool = Field(
        ..., title="Minimal", description="Every accepted draw had exactly two critical points",
    )
    witness: Witness | None = Field(
        None, title="Witness", description="First accepted draw with more than two critical points",
    )
    report: TacReport = Field(..., title="Report", description="The underlying τ estimate")


class InvarianceReport(BaseModel):
    """Minimality verdicts under several unit ellipsoids"""

    all_minimal: bool = Field(..., title="All minimal", description="Minimal for every ellipsoid")
    certificates: list[CertificateReport] = Field(..., title="Certificates")


class FrameIndependenceReport(BaseModel):
    """τ estimated with several transversal frames"""

    agree: bool = Field(
        ..., title="Agree", description="All pairs agree within three combined standard errors",
    )
    reports: list[TacReport] = Field(..., title="Reports")


def _resolve_workers(num_workers: int) -> int:
    if num_workers == -1:
        return max((os.cpu_count() or 1) - 1, 0)
    return num_workers


def _sweep(
    atlas: Atlas,
    S: UnitEllipsoid,
    sample_count: int,
    seed: int,
    config: SearchConfig,
    tolerances: Tolerances,
    num_workers: int,
    diagnostics: DiagnosticsSink | None,
) -> tuple[list[MorseCount], int]:
    """Accepted Morse counts in stream order and the number of rejected draws

    Draws are taken from a single generator in blocks and evaluated concurrently; results are
    consumed in stream order so the outcome does not depend on the worker count.
    """
    seed_grid = SeedGrid.build(atlas, config)
    rng = np.random.default_rng(seed)
    accepted: list[MorseCount] = []
    rejected = 0
    workers = _resolve_workers(num_workers)

    def search(phi: MultiCovector) -> MorseCount:
        return find_critical_points(atlas, phi, config, seed_grid)

    executor = ThreadPoolExecutor(max_workers=workers) if workers > 0 else None
    try:
        while len(accepted) < sample_count:
            block = draw_ellipsoid(S, rng, sample_count)
            results = executor.map(search, block) if executor else map(search, block)
            for result in results:
                if len(accepted) >= sample_count:
                    break
                if diagnostics is not None:
                    diagnostics(result.diagnostics())
                if result.morse:
                    accepted.append(result)
                else:
                    rejected += 1

            total = len(accepted) + rejected
            if rejected / total > tolerances.max_rejection_rate:
                raise PathologyError(
                    f"{rejected} of {total} height functions on {atlas.name} failed the Morse "
                    "test; the input looks symmetric or degenerate",
                )
    finally:
        if executor is not None:
            executor.shutdown(wait=True)
    return accepted, rejected


def _warn_if_not_equiaffine(atlas: Atlas, frame: TransversalFrame, tolerances: Tolerances) -> None:
    report = check_equiaffine(atlas, frame, resolution=8)
    if report.max_nabla_theta > tolerances.equiaffine_tol:
        logger.warning(
            f"Frame {frame.id} on {atlas.name} is not equiaffine "
            f"(max |∇θ| = {report.max_nabla_theta:.3e})",
        )


def _report(
    atlas: Atlas,
    frame: TransversalFrame,
    S: UnitEllipsoid,
    seed: int,
    accepted: list[MorseCount],
    rejected: int,
) -> TacReport:
    counts = np.array([result.count for result in accepted])
    stderr = float(np.std(counts, ddof=1) / np.sqrt(len(counts))) if len(counts) > 1 else 0.0
    keys, freq = np.unique(counts, return_counts=True)
    violations = 0
    if atlas.euler is not None:
        violations = sum(index_sum(result) != atlas.euler for result in accepted)
    return TacReport(
        atlas=atlas.name,
        tau_estimate=float(np.mean(counts)),
        stderr=stderr,
        histogram={int(k): int(f) for k, f in zip(keys, freq, strict=True)},
        non_morse_rejections=rejected,
        sample_count=len(accepted),
        ellipsoid=S.identifier,
        frame=frame.id,
        seed=seed,
        index_sum_violations=int(violations),
    )


def estimate_tau(
    atlas: Atlas,
    frame: TransversalFrame,
    S: UnitEllipsoid,
    sample_count: int,
    seed: int,
    config: SearchConfig | None = None,
    tolerances: Tolerances | None = None,
    num_workers: int = 0,
    diagnostics: DiagnosticsSink | None = None,
) -> TacReport:
    """Estimate τ_S(f) as the mean critical-point count of sampled Morse height functions

    Args:
        atlas: The immersion
        frame: Its transversal frame; only checked and recorded, counts do not depend on it
        S: The unit ellipsoid sampled
        sample_count: Accepted draws to average
        seed: Seed of the φ stream
        config: Critical-point search settings
        tolerances: Rejection and equiaffine tolerances
        num_workers: Threads used for the sweep
        diagnostics: Called with the diagnostics of every draw, in stream order

    Raises:
        PathologyError: More than max_rejection_rate of the draws are rejected
    """
    config = config or SearchConfig()
    tolerances = tolerances or Tolerances()
    _warn_if_not_equiaffine(atlas, frame, tolerances)

    logger.info(f"Estimating tau on {atlas.name} with {sample_count} samples, seed {seed}")
    accepted, rejected = _sweep(
        atlas, S, sample_count, seed, config, tolerances, num_workers, diagnostics,
    )
    report = _report(atlas, frame, S, seed, accepted, rejected)
    logger.info(
        f"tau({atlas.name}) = {report.tau_estimate:.4f} ± {report.stderr:.4f}, "
        f"{rejected} rejections",
    )
    return report


def certify_minimal(
    atlas: Atlas,
    frame: TransversalFrame,
    S: UnitEllipsoid,
    sample_count: int,
    seed: int,
    config: SearchConfig | None = None,
    tolerances: Tolerances | None = None,
    num_workers: int = 0,
    diagnostics: DiagnosticsSink | None = None,
) -> CertificateReport:
    """Sampling certificate of τ_S(f) = 2

    A witness disproves minimality. Its absence is statistical evidence only.
    """
    config = config or SearchConfig()
    tolerances = tolerances or Tolerances()
    _warn_if_not_equiaffine(atlas, frame, tolerances)
    accepted, rejected = _sweep(
        atlas, S, sample_count, seed, config, tolerances, num_workers, diagnostics,
    )
    report = _report(atlas, frame, S, seed, accepted, rejected)

    witness = None
    for result in accepted:
        if result.count > 2:
            witness = Witness(
                phi=[float(c) for c in result.phi.coeffs],
                count=result.count,
                indices=[record.index for record in result.records],
                points=[[float(x) for x in record.point] for record in result.records],
            )
            break
    logger.info(f"Minimality of {atlas.name}: {witness is None}")
    return CertificateReport(minimal=witness is None, witness=witness, report=report)


def ellipsoid_invariance(
    atlas: Atlas,
    frame: TransversalFrame,
    ellipsoids: Sequence[UnitEllipsoid],
    sample_count: int,
    seed: int,
    config: SearchConfig | None = None,
    num_workers: int = 0,
) -> InvarianceReport:
    """Run certify_minimal under each ellipsoid"""
    if not ellipsoids:
        raise InputError("ellipsoid_invariance needs at least one ellipsoid")
    certificates = [
        certify_minimal(atlas, frame, S, sample_count, seed, config, num_workers=num_workers)
        for S in ellipsoids
    ]
    return InvarianceReport(
        all_minimal=all(c.minimal for c in certificates), certificates=certificates,
    )


def chern_lashof_check(report: TacReport, betti: Sequence[int] | None) -> bool:
    """τ ≥ Σ b_k up to three standard errors

    Raises:
        InputError: The Betti numbers are unknown
    """
    if not betti:
        raise InputError(f"No Betti numbers known for {report.atlas}; the bound does not apply")
    return report.tau_estimate >= sum(betti) - 3 * report.stderr


def frame_independence(
    atlas: Atlas,
    frames: Sequence[TransversalFrame],
    S: UnitEllipsoid,
    sample_count: int,
    seed: int,
    config: SearchConfig | None = None,
    num_workers: int = 0,
) -> FrameIndependenceReport:
    """τ for each frame, each from its own stream seed + k, compared pairwise"""
    if len(frames) < 2:
        raise InputError("frame_independence needs at least two frames")
    reports = [
        estimate_tau(atlas, frame, S, sample_count, seed + k, config, num_workers=num_workers)
        for k, frame in enumerate(frames)
    ]
    agree = all(
        abs(a.tau_estimate - b.tau_estimate) <= 3 * np.hypot(a.stderr, b.stderr)
        for i, a in enumerate(reports) for b in reports[i + 1:]
    )
    return FrameIndependenceReport(agree=bool(agree), reports=reports)
