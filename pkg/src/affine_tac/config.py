"""Run configuration: pydantic models plus YAML load and save"""

import logging
import os
from typing import Literal

import fsspec
import yaml
from pyaml_env import parse_config
from pydantic import BaseModel, Field, field_validator

from affine_tac import consts
from affine_tac.exceptions import InputError

logger = logging.getLogger(__name__)


class SearchConfig(BaseModel):
    """Settings of the critical-point search"""

    seed_resolution: int = Field(
        consts.seed_resolution, ge=2, title="Seed resolution",
        description="Seed grid points per parameter axis",
    )
    max_seed_points: int = Field(
        20_000, ge=4, title="Max seed points",
        description="Upper bound on seed grid points per chart; lowers the per-axis resolution",
    )
    newton_max_iter: int = Field(
        consts.newton_max_iter, ge=1, title="Newton iterations", description="Iterations per seed",
    )
    grad_tol: float = Field(
        consts.grad_tol, gt=0, title="Gradient tolerance",
        description="Gradient tolerance for the normalised covector, relative to the diameter",
    )
    morse_tol: float = Field(
        consts.morse_tol, gt=0, title="Morse tolerance",
        description="Critical points with |det Hess| below this are degenerate",
    )
    dedup_radius: float = Field(
        consts.dedup_radius, gt=0, title="Dedup radius",
        description="Ambient radius merging critical points, relative to the diameter",
    )
    pinv_cutoff: float = Field(
        1e-10, gt=0, title="Pseudo-inverse cutoff",
        description="Relative eigenvalue cutoff of the Newton pseudo-inverse",
    )
    step_fraction: float = Field(
        0.125, gt=0, le=1, title="Step fraction",
        description="Newton steps are clipped to this fraction of the smallest chart extent",
    )


class Tolerances(BaseModel):
    """Tolerances of the geometric checks"""

    supp_tol: float = Field(
        consts.supp_tol, gt=0, title="Supporting tolerance",
        description="Supporting-hyperplane tolerance, relative to diameter times |ν|",
    )
    hull_rank_tol: float = Field(
        consts.hull_rank_tol, gt=0, title="Hull rank tolerance",
        description="Relative singular value cut-off for the affine hull",
    )
    equiaffine_tol: float = Field(
        1e-5, gt=0, title="Equiaffine tolerance",
        description="Largest |∇θ| accepted before warning",
    )
    max_rejection_rate: float = Field(
        consts.max_rejection_rate, gt=0, le=1, title="Max rejection rate",
        description="Rejection rate of non-Morse draws above which a sweep is abandoned",
    )


class RunConfig(BaseModel):
    """Everything a CLI run depends on; echoed into every report"""

    command: str = Field("tac", title="Command", description="The CLI subcommand")
    entry: str | None = Field(None, title="Entry", description="Catalog entry name")
    manifest: str | None = Field(
        None, title="Manifest", description="Path to a catalog manifest replacing the built-in one",
    )
    sample_count: int = Field(
        consts.sample_count, ge=1, title="Sample count",
        description="Accepted φ draws per estimate",
    )
    seed: int = Field(0, title="Seed", description="Seed of the φ stream")
    ellipsoid: Literal["standard", "sheared"] = Field(
        "standard", title="Ellipsoid", description="ζ-basis of the unit ellipsoid",
    )
    sample_resolution: int = Field(
        32, ge=2, title="Sample resolution",
        description="Grid points per axis for hull and convexity sampling",
    )
    scan_resolution: int = Field(
        64, ge=2, title="Scan resolution", description="Grid points per axis of gauss-scan",
    )
    chart: str | None = Field(None, title="Chart", description="Chart scanned by gauss-scan")
    search: SearchConfig = Field(default_factory=SearchConfig, title="Search")
    tolerances: Tolerances = Field(default_factory=Tolerances, title="Tolerances")
    num_workers: int = Field(
        default_factory=lambda: int(os.getenv("AFFINE_TAC_NUM_WORKERS", "0")),
        ge=-1,
        validate_default=True,
        title="Workers",
        description="Threads of the φ sweep; -1 uses one less than the CPU count, 0 runs serially",
    )
    output: str | None = Field(None, title="Output", description="Report path; stdout if None")
    output_format: Literal["json", "csv"] = Field(
        "json", title="Output format", description="Summary JSON or tabular CSV",
    )
    diagnostics: str | None = Field(
        None, title="Diagnostics", description="Path of the per-φ JSON-lines stream",
    )
    record_timing: bool = Field(
        True, title="Record timing",
        description="Embed wall-clock seconds; disable for byte-identical reports",
    )

    @field_validator("num_workers")
    @classmethod
    def resolve_workers(cls, v: int) -> int:
        """Resolve -1 to one less than the number of CPUs"""
        if v == -1:
            return max((os.cpu_count() or 1) - 1, 0)
        return v


def load_yaml_config(path: str) -> dict:
    """Load config file from path, interpolating environment variables"""
    with fsspec.open(path, mode="r") as stream:
        config = parse_config(data=stream)
    return config or {}


def save_yaml_config(config: dict, path: str) -> None:
    """Save config file to path"""
    with fsspec.open(path, mode="w") as file:
        yaml.dump(config, file, default_flow_style=False)


def load_run_config(path: str | None = None, **overrides: object) -> RunConfig:
    """Build a RunConfig from an optional YAML file and keyword overrides

    Overrides equal to None are ignored, so CLI options left unset fall back to the file.
    """
    values = load_yaml_config(path) if path is not None else {}
    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return RunConfig(**values)
    except ValueError as e:
        raise InputError(f"Invalid run configuration: {e}") from e
