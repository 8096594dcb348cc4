"""Compact manifolds as atlases of parameter charts with jet evaluation

A chart carries either an analytic jet (value, first and second derivatives in closed form)
or only a value function, in which case derivatives come from central differences. All chart
functions are vectorised over leading axes of the parameter array.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from affine_tac import consts
from affine_tac.exceptions import DegenerateError, DomainError, InputError

logger = logging.getLogger(__name__)

ValueFunction = Callable[[np.ndarray], np.ndarray]
JetFunction = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True, eq=False)
class ImmersionJet:
    """Value, first and second partial derivatives of f, possibly for a batch of points

    Attributes:
        point: f(u), shape (..., m)
        d1: ∂_i f, shape (..., n, m)
        d2: ∂_i∂_j f, shape (..., n, n, m), symmetric in (i, j)
    """

    point: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    @property
    def n(self) -> int:
        return int(self.d1.shape[-2])

    @property
    def m(self) -> int:
        return int(self.point.shape[-1])

    def __getitem__(self, index: int | slice | np.ndarray) -> "ImmersionJet":
        return ImmersionJet(self.point[index], self.d1[index], self.d2[index])

    def asymmetry(self) -> float:
        """Largest |∂_i∂_j f − ∂_j∂_i f|"""
        return float(np.max(np.abs(self.d2 - np.swapaxes(self.d2, -2, -3)), initial=0.0))


def finite_difference_jet(
    value: ValueFunction, u: np.ndarray, step: float, richardson: bool = False,
) -> ImmersionJet:
    """Second-order central-difference jet of a vectorised value function

    Args:
        value: Maps parameter arrays (..., n) to points (..., m)
        u: Parameter points (..., n)
        step: Difference step h
        richardson: Combine steps h and h/2 to cancel the leading error term
    """
    if richardson:
        coarse = finite_difference_jet(value, u, step)
        fine = finite_difference_jet(value, u, step / 2)
        return ImmersionJet(
            fine.point,
            (4 * fine.d1 - coarse.d1) / 3,
            (4 * fine.d2 - coarse.d2) / 3,
        )

    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    shifts = step * np.eye(n)
    f0 = value(u)
    fp = value(u[..., None, :] + shifts)
    fm = value(u[..., None, :] - shifts)

    d1 = (fp - fm) / (2 * step)
    d2 = np.zeros(u.shape[:-1] + (n, n, f0.shape[-1]))
    for i in range(n):
        d2[..., i, i, :] = (fp[..., i, :] - 2 * f0 + fm[..., i, :]) / step**2
        for j in range(i + 1, n):
            e_i, e_j = shifts[i], shifts[j]
            mixed = (
                value(u + e_i + e_j) - value(u + e_i - e_j)
                - value(u - e_i + e_j) + value(u - e_i - e_j)
            ) / (4 * step**2)
            d2[..., i, j, :] = mixed
            d2[..., j, i, :] = mixed
    return ImmersionJet(f0, d1, d2)


@dataclass(frozen=True, eq=False)
class Chart:
    """A parameter chart of an immersion

    Args:
        id: Label of the chart
        lower: Lower corner of the parameter box
        upper: Upper corner of the parameter box
        periodic: Per-axis periodicity flags
        jet: Analytic jet function; takes precedence over `value`
        value: Value function, differentiated numerically when no analytic jet is given
        step: Finite-difference step; defaults to fd_step times the domain diameter
        richardson: Use Richardson extrapolation for finite-difference jets
        rank_tol: Smallest singular value of df accepted by the immersion check
    """

    id: str
    lower: np.ndarray
    upper: np.ndarray
    periodic: tuple[bool, ...]
    jet: JetFunction | None = None
    value: ValueFunction | None = None
    step: float | None = None
    richardson: bool = False
    rank_tol: float = consts.rank_tol

    def __post_init__(self) -> None:
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or len(self.periodic) != lower.size:
            raise InputError(f"Chart {self.id}: inconsistent domain description")
        if np.any(upper <= lower):
            raise InputError(f"Chart {self.id}: empty parameter box")
        if self.jet is None and self.value is None:
            raise InputError(f"Chart {self.id}: needs an analytic jet or a value function")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "periodic", tuple(bool(p) for p in self.periodic))

    @property
    def n(self) -> int:
        return int(self.lower.size)

    @property
    def extent(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def domain_diameter(self) -> float:
        return float(np.linalg.norm(self.extent))

    @property
    def fd_step(self) -> float:
        return self.step if self.step is not None else consts.fd_step * self.domain_diameter

    def wrap(self, u: np.ndarray) -> np.ndarray:
        """Reduce periodic coordinates into [lower, upper)"""
        u = np.array(u, dtype=float)
        for axis, periodic in enumerate(self.periodic):
            if periodic:
                u[..., axis] = self.lower[axis] + np.mod(
                    u[..., axis] - self.lower[axis], self.extent[axis],
                )
        return u

    def contains(self, u: np.ndarray) -> np.ndarray:
        """Whether each parameter point lies in the (wrapped) domain"""
        u = self.wrap(u)
        inside = (u >= self.lower) & (u <= self.upper)
        inside |= np.asarray(self.periodic)
        return np.all(inside, axis=-1)

    def evaluate(self, u: np.ndarray) -> ImmersionJet:
        """Jets at parameter points without any domain or rank checks"""
        u = np.asarray(u, dtype=float)
        if self.jet is not None:
            return ImmersionJet(*self.jet(u))
        return finite_difference_jet(self.value, u, self.fd_step, self.richardson)

    def grid(self, counts: Sequence[int]) -> np.ndarray:
        """Regular parameter grid of shape (*counts, n)

        Periodic axes exclude the duplicate endpoint, other axes use cell centres so that
        no sample sits on the boundary.
        """
        if len(counts) != self.n:
            raise InputError(f"Chart {self.id}: resolution needs {self.n} entries")
        axes = []
        for axis, count in enumerate(counts):
            if count < 2:
                raise InputError(f"Resolution must be at least 2 per axis, got {count}")
            offsets = np.arange(count) if self.periodic[axis] else np.arange(count) + 0.5
            axes.append(self.lower[axis] + self.extent[axis] * offsets / count)
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def check_jets(chart: Chart, jets: ImmersionJet) -> None:
    """Raise if df loses rank anywhere in a batch of jets"""
    sigma = np.linalg.svd(jets.d1, compute_uv=False)[..., -1]
    if np.any(sigma <= chart.rank_tol):
        worst = float(np.min(sigma))
        raise DegenerateError(
            f"Chart {chart.id}: immersion condition fails (smallest singular value {worst:.3e})",
        )


def eval_jets(chart: Chart, u: np.ndarray) -> ImmersionJet:
    """Checked jets at a batch of parameter points (..., n)"""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != chart.n:
        raise InputError(f"Chart {chart.id} has {chart.n} parameters, got {u.shape[-1]}")
    if not np.all(chart.contains(u)):
        raise DomainError(f"Parameter point outside the domain of chart {chart.id}")
    jets = chart.evaluate(chart.wrap(u))
    check_jets(chart, jets)
    return jets


def eval_jet(chart: Chart, u: np.ndarray) -> ImmersionJet:
    """Checked jet at a single parameter point

    Raises:
        DomainError: u lies outside the chart domain
        DegenerateError: df is not injective at u
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (chart.n,):
        raise InputError(f"Chart {chart.id} expects a point of shape ({chart.n},), got {u.shape}")
    return eval_jets(chart, u[None])[0]


def affine_image(chart: Chart, matrix: np.ndarray, offset: np.ndarray | None = None) -> Chart:
    """The chart of u ↦ A (f(u) − b)

    Args:
        chart: Source chart
        matrix: Linear part A, shape (m', m)
        offset: Point b subtracted before applying A
    """
    matrix = np.asarray(matrix, dtype=float)
    offset = np.zeros(matrix.shape[1]) if offset is None else np.asarray(offset, dtype=float)

    def jet(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        source = chart.evaluate(u)
        return (
            (source.point - offset) @ matrix.T,
            source.d1 @ matrix.T,
            source.d2 @ matrix.T,
        )

    return replace(chart, jet=jet, value=None)


@dataclass(frozen=True, eq=False)
class Atlas:
    """An atlas of an immersed compact manifold

    Args:
        charts: The charts
        name: Label used in logs and reports
        overlap_dedup_radius: Ambient distance below which two samples are identified;
            defaults to 1e-6 times the diameter
        betti: Known Betti numbers b_0, …, b_n
        euler: Known Euler characteristic
    """

    charts: tuple[Chart, ...]
    name: str = "atlas"
    overlap_dedup_radius: float | None = None
    betti: tuple[int, ...] | None = None
    euler: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        charts = tuple(self.charts)
        if len(charts) == 0:
            raise InputError("An atlas needs at least one chart")
        if len({chart.n for chart in charts}) != 1:
            raise InputError(f"Atlas {self.name}: charts disagree on the dimension")
        if len({chart.id for chart in charts}) != len(charts):
            raise InputError(f"Atlas {self.name}: chart ids must be unique")
        object.__setattr__(self, "charts", charts)
        if self.betti is not None and self.euler is None:
            euler = sum((-1) ** k * b for k, b in enumerate(self.betti))
            object.__setattr__(self, "euler", euler)

    @property
    def n(self) -> int:
        return self.charts[0].n

    @cached_property
    def m(self) -> int:
        chart = self.charts[0]
        return int(chart.evaluate((chart.lower + chart.upper)[None] / 2).m)

    def chart(self, chart_id: str) -> Chart:
        for chart in self.charts:
            if chart.id == chart_id:
                return chart
        raise InputError(f"Atlas {self.name} has no chart {chart_id!r}")

    def sample_points(self, resolution: int | Sequence[int]) -> np.ndarray:
        """Images of all chart grids, stacked into shape (N, m)"""
        points = []
        for chart in self.charts:
            grid = chart.grid(_counts(chart, resolution)).reshape(-1, chart.n)
            points.append(chart.evaluate(grid).point)
        return np.concatenate(points)

    @cached_property
    def diameter(self) -> float:
        """Bounding-box diagonal of a moderate sample of the image"""
        points = self.sample_points(16)
        return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))

    @property
    def dedup_radius(self) -> float:
        if self.overlap_dedup_radius is not None:
            return self.overlap_dedup_radius
        return 1e-6 * self.diameter

    def is_connected(self, resolution: int = 16) -> bool:
        """Whether the chart images chain together at sample resolution"""
        images = []
        spacing = 0.0
        for chart in self.charts:
            counts = _counts(chart, resolution)
            grid = chart.grid(counts)
            image = chart.evaluate(grid.reshape(-1, chart.n)).point
            images.append(image)
            # Largest distance between grid neighbours along any axis
            points = image.reshape(*counts, -1)
            for axis in range(chart.n):
                step = np.linalg.norm(np.diff(points, axis=axis), axis=-1)
                spacing = max(spacing, float(step.max()))

        reached = {0}
        frontier = [0]
        while frontier:
            i = frontier.pop()
            for j in range(len(images)):
                if j in reached:
                    continue
                gaps = np.linalg.norm(images[i][:, None, :] - images[j][None, :, :], axis=-1)
                if gaps.min() <= spacing:
                    reached.add(j)
                    frontier.append(j)
        return len(reached) == len(images)


def _counts(chart: Chart, resolution: int | Sequence[int]) -> list[int]:
    if isinstance(resolution, int | np.integer):
        return [int(resolution)] * chart.n
    return [int(r) for r in resolution]


def sample_parameters(
    atlas: Atlas,
    resolution: int | Sequence[int],
    dedup_radius: float | None = None,
) -> list[tuple[str, np.ndarray]]:
    """Deterministic parameter samples over every chart

    Samples are produced chart by chart in grid order. A sample whose image lies within the
    dedup radius of an already kept sample from an earlier chart is dropped.

    Args:
        atlas: The atlas
        resolution: Grid points per axis, as one number or per axis
        dedup_radius: Identification radius; defaults to the atlas dedup radius
    """
    radius = atlas.dedup_radius if dedup_radius is None else dedup_radius
    samples: list[tuple[str, np.ndarray]] = []
    kept_images: list[np.ndarray] = []
    for chart in atlas.charts:
        grid = chart.grid(_counts(chart, resolution)).reshape(-1, chart.n)
        images = chart.evaluate(grid).point
        if kept_images:
            previous = np.concatenate(kept_images)
            nearest = np.min(
                np.linalg.norm(images[:, None, :] - previous[None, :, :], axis=-1), axis=1,
            )
            keep = nearest > radius
        else:
            keep = np.ones(len(grid), dtype=bool)
        samples.extend((chart.id, u) for u in grid[keep])
        kept_images.append(images[keep])
    return samples
