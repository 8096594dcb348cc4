"""Critical points of height functions h_φ = h̃_φ ∘ f on a compact atlas

The search seeds Newton's method on the gradient from a dense parameter grid, merges the
converged points across charts by ambient distance and classifies them by their Hessian.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, Field

from affine_tac import consts
from affine_tac.config import SearchConfig
from affine_tac.exceptions import InputError
from affine_tac.exterior import MultiCovector, height, height_covector
from affine_tac.manifold import Atlas, Chart, ImmersionJet

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ChartSeeds:
    """The seed grid of one chart with its jets precomputed"""

    chart: Chart
    grid: np.ndarray
    jets: ImmersionJet


@dataclass(frozen=True, eq=False)
class SeedGrid:
    """Seed grids of every chart of an atlas, shared by all φ of a sweep"""

    atlas: Atlas
    charts: tuple[ChartSeeds, ...]
    resolution: tuple[int, ...]

    @classmethod
    def build(cls, atlas: Atlas, config: SearchConfig | None = None) -> "SeedGrid":
        """Evaluate the seed grid of every chart

        The per-axis resolution is reduced for higher-dimensional charts so that no chart
        exceeds config.max_seed_points grid points.
        """
        config = config or SearchConfig()
        per_axis = min(
            config.seed_resolution, int(np.floor(config.max_seed_points ** (1 / atlas.n))),
        )
        resolution = (max(per_axis, 2),) * atlas.n
        seeds = []
        for chart in atlas.charts:
            grid = chart.grid(resolution)
            seeds.append(ChartSeeds(chart=chart, grid=grid, jets=chart.evaluate(grid)))
        logger.debug(f"Built seed grid for {atlas.name} at resolution {resolution}")
        return cls(atlas=atlas, charts=tuple(seeds), resolution=resolution)


@dataclass(frozen=True, eq=False)
class CriticalPointRecord:
    """A critical point of a height function

    Attributes:
        chart_id: Chart the point was found in
        parameter: Parameter point in that chart
        point: Ambient image f(p)
        height: h_φ(p)
        gradient_residual: |∇h| at p, for the normalised covector
        hessian_eigenvalues: Eigenvalues of the chart Hessian of the normalised height
        degenerate: |det Hess| < morse_tol
    """

    chart_id: str
    parameter: np.ndarray
    point: np.ndarray
    height: float
    gradient_residual: float
    hessian_eigenvalues: np.ndarray
    degenerate: bool
    conditioning: float = field(default=1.0, repr=False)

    @property
    def hessian_signs(self) -> tuple[int, ...]:
        return tuple(int(s) for s in np.sign(self.hessian_eigenvalues))

    @property
    def index(self) -> int:
        """Number of negative Hessian eigenvalues"""
        return int(np.sum(self.hessian_eigenvalues < 0))

    @property
    def is_minimum(self) -> bool:
        return not self.degenerate and bool(np.all(self.hessian_eigenvalues > 0))

    @property
    def is_maximum(self) -> bool:
        return not self.degenerate and bool(np.all(self.hessian_eigenvalues < 0))


class PhiDiagnostics(BaseModel):
    """One JSON line of the per-φ diagnostics stream"""

    phi: list[float] = Field(..., title="Phi", description="E-coefficients of the direction")
    seeds: int = Field(..., title="Seeds", description="Newton seeds taken from the grid")
    converged: int = Field(..., title="Converged", description="Seeds that converged")
    discarded: int = Field(
        ..., title="Discarded", description="Seeds that diverged or left their chart",
    )
    count: int = Field(..., title="Count", description="Distinct critical points")
    morse: bool = Field(..., title="Morse", description="Whether h_φ passed the Morse test")
    rejected: bool = Field(..., title="Rejected", description="Whether the draw was rejected")


@dataclass(frozen=True, eq=False)
class MorseCount:
    """Critical points of one height function"""

    phi: MultiCovector
    records: tuple[CriticalPointRecord, ...]
    morse: bool
    seeds: int = 0
    converged: int = 0
    discarded: int = 0

    @property
    def count(self) -> int:
        return len(self.records)

    def diagnostics(self) -> PhiDiagnostics:
        return PhiDiagnostics(
            phi=[float(c) for c in self.phi.coeffs],
            seeds=self.seeds,
            converged=self.converged,
            discarded=self.discarded,
            count=self.count,
            morse=self.morse,
            rejected=not self.morse,
        )


def index_sum(count: MorseCount) -> int:
    """Σ (-1)^index over the critical points, χ(M) for a Morse function"""
    return sum((-1) ** record.index for record in count.records)


def _local_minima(score: np.ndarray, periodic: tuple[bool, ...]) -> np.ndarray:
    """Grid points where score is not larger than at any axis neighbour"""
    keep = np.ones(score.shape, dtype=bool)
    for axis, wrap in enumerate(periodic):
        for shift in (1, -1):
            neighbour = np.roll(score, shift, axis=axis)
            if not wrap:
                edge = [slice(None)] * score.ndim
                edge[axis] = 0 if shift == 1 else -1
                neighbour[tuple(edge)] = np.inf
            keep &= score <= neighbour
    return keep


def _newton(
    chart: Chart,
    seeds: np.ndarray,
    covector: np.ndarray,
    config: SearchConfig,
    tolerance: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised damped Newton iteration on ∇h from a batch of seeds

    Returns:
        Final parameter points and a mask of seeds that converged inside the chart
    """
    u = seeds.copy()
    active = np.ones(len(u), dtype=bool)
    converged = np.zeros(len(u), dtype=bool)
    max_step = config.step_fraction * float(np.min(chart.extent))

    for _ in range(config.newton_max_iter):
        if not np.any(active):
            break
        jets = chart.evaluate(u[active])
        gradient = jets.d1 @ covector
        hessian = jets.d2 @ covector

        done = np.linalg.norm(gradient, axis=-1) < tolerance
        idx = np.flatnonzero(active)
        converged[idx[done]] = True
        active[idx[done]] = False

        todo = ~done
        if not np.any(todo):
            break
        values, vectors = np.linalg.eigh(hessian[todo])
        scale = np.max(np.abs(values), axis=-1, keepdims=True)
        cutoff = config.pinv_cutoff * np.where(scale > 0, scale, 1.0)
        inverse = np.where(np.abs(values) > cutoff, 1 / np.where(values == 0, 1, values), 0.0)
        projected = np.einsum("...ji,...j->...i", vectors, gradient[todo])
        step = -np.einsum("...ij,...j->...i", vectors, inverse * projected)

        length = np.linalg.norm(step, axis=-1, keepdims=True)
        step *= np.minimum(1.0, max_step / np.where(length > 0, length, 1.0))
        moved = chart.wrap(u[idx[todo]] + step)
        u[idx[todo]] = moved

        escaped = ~chart.contains(moved)
        active[idx[todo][escaped]] = False

    if np.any(active):
        # Check the final iterate of seeds still running
        idx = np.flatnonzero(active)
        jets = chart.evaluate(u[idx])
        done = np.linalg.norm(jets.d1 @ covector, axis=-1) < tolerance
        converged[idx[done]] = True
    return u, converged & chart.contains(u)


def find_critical_points(
    atlas: Atlas,
    phi: MultiCovector,
    config: SearchConfig | None = None,
    seed_grid: SeedGrid | None = None,
) -> MorseCount:
    """Enumerate the critical points of h_φ

    Args:
        atlas: The immersion
        phi: Direction of the height function
        config: Search tolerances
        seed_grid: Precomputed seed grid; built on the fly if None

    Raises:
        InputError: φ vanishes or has the wrong dimension
    """
    config = config or SearchConfig()
    if phi.norm() == 0:
        raise InputError("Height function of the zero multicovector")
    if seed_grid is None:
        seed_grid = SeedGrid.build(atlas, config)
    if seed_grid.charts[0].jets.m != phi.dim:
        raise InputError(
            f"Direction of dimension {phi.dim} on an atlas in R^{seed_grid.charts[0].jets.m}",
        )

    covector = height_covector(phi)
    scale = np.linalg.norm(covector)
    covector = covector / scale
    tolerance = config.grad_tol * atlas.diameter

    found = []
    n_seeds = n_converged = 0
    for seeds in seed_grid.charts:
        chart = seeds.chart
        gradient = seeds.jets.d1 @ covector
        score = np.sum(gradient**2, axis=-1)
        start = seeds.grid[_local_minima(score, chart.periodic)]
        n_seeds += len(start)

        final, ok = _newton(chart, start, covector, config, tolerance)
        n_converged += int(np.sum(ok))
        if not np.any(ok):
            continue

        points = final[ok]
        jets = chart.evaluate(points)
        hessians = jets.d2 @ covector
        eigenvalues = np.linalg.eigvalsh(hessians)
        residuals = np.linalg.norm(jets.d1 @ covector, axis=-1)
        conditioning = np.linalg.svd(jets.d1, compute_uv=False)[..., -1]
        for k in range(len(points)):
            found.append(
                CriticalPointRecord(
                    chart_id=chart.id,
                    parameter=points[k],
                    point=jets.point[k],
                    height=float(scale * (covector @ jets.point[k])),
                    gradient_residual=float(residuals[k]),
                    hessian_eigenvalues=eigenvalues[k],
                    # Chart Hessian of the unit covector; morse_tol assumes O(1) parameter scales
                    degenerate=bool(abs(np.prod(eigenvalues[k])) < config.morse_tol),
                    conditioning=float(conditioning[k]),
                ),
            )

    records = _dedup(found, config.dedup_radius * atlas.diameter)
    has_min = any(record.is_minimum for record in records)
    has_max = any(record.is_maximum for record in records)
    morse = (
        not any(record.degenerate for record in records)
        and has_min and has_max and len(records) >= 2
    )
    return MorseCount(
        phi=phi,
        records=tuple(records),
        morse=morse,
        seeds=n_seeds,
        converged=n_converged,
        discarded=n_seeds - n_converged,
    )


def _dedup(records: list[CriticalPointRecord], radius: float) -> list[CriticalPointRecord]:
    """Merge records closer than radius, keeping the one from the best-conditioned chart"""
    clusters: list[list[CriticalPointRecord]] = []
    for record in records:
        for cluster in clusters:
            if np.linalg.norm(cluster[0].point - record.point) < radius:
                cluster.append(record)
                break
        else:
            clusters.append([record])
    return [max(cluster, key=lambda r: r.conditioning) for cluster in clusters]


def is_supporting_direction(
    atlas: Atlas,
    phi: MultiCovector,
    record: CriticalPointRecord,
    resolution: int = consts.seed_resolution,
    supp_tol: float = consts.supp_tol,
) -> bool:
    """Whether the level set of h_φ through the record supports f(M)

    True iff h_φ(x) - h_φ(p) keeps one sign, up to supp_tol, over all atlas samples.
    """
    points = atlas.sample_points(resolution)
    covector = height_covector(phi)
    values = points @ covector - height(phi, record.point)
    tol = supp_tol * atlas.diameter * float(np.linalg.norm(covector))
    return bool(np.min(values) >= -tol or np.max(values) <= tol)
