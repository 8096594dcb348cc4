"""Command-line app for the equiaffine total absolute curvature lab"""

import logging
import os
import sys
import time
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from importlib.metadata import PackageNotFoundError, version
from typing import Annotated, Any

import fsspec
import numpy as np
import pandas as pd
import sentry_sdk
import typer
import xarray as xr
from pydantic import BaseModel, Field

from affine_tac.catalog import CatalogEntry, entry, kossowski_check, load_manifest
from affine_tac.config import RunConfig, load_run_config
from affine_tac.curvature import gauss_scan
from affine_tac.exceptions import DegenerateError, InputError, PathologyError, VerdictError
from affine_tac.exterior import UnitEllipsoid
from affine_tac.geometry import (
    affine_hull_dim,
    convexity_certify,
    main_theorem_check,
    reduce_to_hull,
)
from affine_tac.morse import PhiDiagnostics
from affine_tac.tac import CertificateReport, TacReport, certify_minimal, estimate_tau
from affine_tac.validate_report import validate_tac_report

try:
    __version__ = version("affine-tac")
except PackageNotFoundError:
    __version__ = "v?"

# sentry
sentry_sdk.init(
    dsn=os.getenv("SENTRY_DSN"),
    environment=os.getenv("ENVIRONMENT", "local"),
    traces_sample_rate=1,
)

sentry_sdk.set_tag("app_name", "affine_tac")
sentry_sdk.set_tag("version", __version__)

# ---------------------------------------------------------------------------
# LOGGER

logging.basicConfig(
    level=getattr(logging, os.getenv("LOGLEVEL", "INFO")),
    format="[%(asctime)s] {%(pathname)s:%(lineno)d} %(levelname)s - %(message)s",
)
logger = logging.getLogger()

# ---------------------------------------------------------------------------
# EXIT CODES

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERDICT = 2
EXIT_PATHOLOGY = 3

# Shear seed of the alternative ζ-basis
SHEARED_ELLIPSOID_SEED = 1

cli = typer.Typer(
    help="Total absolute curvature of equiaffine immersions",
    add_completion=False,
    no_args_is_help=True,
)

# ---------------------------------------------------------------------------
# OPTIONS

Entry = Annotated[str | None, typer.Option("--entry", help="Catalog entry name")]
Manifest = Annotated[
    str | None, typer.Option("--manifest", help="YAML manifest replacing the built-in catalog"),
]
Samples = Annotated[int | None, typer.Option("--samples", help="Accepted φ draws per estimate")]
Seed = Annotated[int | None, typer.Option("--seed", help="Seed of the φ stream")]
ConfigPath = Annotated[str | None, typer.Option("--config", help="YAML run configuration")]
Output = Annotated[str | None, typer.Option("--output", help="Report path, stdout if omitted")]
Format = Annotated[str | None, typer.Option("--format", help="json or csv")]
Workers = Annotated[
    int | None, typer.Option("--workers", help="Sweep threads, -1 for all but one CPU"),
]
Diagnostics = Annotated[
    str | None, typer.Option("--diagnostics", help="JSON-lines path for per-φ diagnostics"),
]
NoTiming = Annotated[bool, typer.Option("--no-timing", help="Omit wall-clock time from the report")]
Ellipsoid = Annotated[str | None, typer.Option("--ellipsoid", help="standard or sheared")]
ChartId = Annotated[str | None, typer.Option("--chart", help="Chart scanned by gauss-scan")]
Resolution = Annotated[int | None, typer.Option("--resolution", help="Grid points per axis")]


class ReportEnvelope(BaseModel):
    """The document every command writes"""

    tool_version: str = Field(..., title="Tool version")
    command: str = Field(..., title="Command")
    config: dict[str, Any] = Field(..., title="Config", description="Echo of the run configuration")
    seed: int = Field(..., title="Seed")
    wall_clock_seconds: float | None = Field(
        None, title="Wall clock", description="Seconds, unless disabled",
    )
    rejections: int | None = Field(None, title="Rejections", description="Non-Morse draws rejected")
    report: dict[str, Any] = Field(..., title="Report")


class GaussScanSummary(BaseModel):
    """Where G and σ_min(dν) are smallest on a scanned chart"""

    atlas: str = Field(..., title="Atlas")
    chart: str = Field(..., title="Chart")
    points: int = Field(..., title="Points")
    min_abs_G: float = Field(..., title="min |G|")
    argmin_abs_G: list[float] = Field(
        ..., title="argmin |G|", description="(u, v) of the smallest |G|",
    )
    min_sigma_min: float = Field(..., title="min σ_min")
    argmin_sigma_min: list[float] = Field(..., title="argmin σ_min")


class ReductionSummary(BaseModel):
    """The hyperplane an immersion was reduced into"""

    atlas: str = Field(..., title="Atlas")
    hull_dim: int = Field(..., title="Hull dimension")
    reduced_dim: int = Field(..., title="Reduced dimension")
    steps: int = Field(..., title="Steps", description="Codimension reductions applied")
    xi: list[float] = Field(..., title="ξ", description="Frame vector removed by the last step")
    base_point: list[float] = Field(..., title="Base point")
    max_nabla_theta: float = Field(
        ..., title="Max |∇θ|", description="Equiaffine check of the result",
    )


# ---------------------------------------------------------------------------
# PLUMBING


def emit_plot_data(
    report: TacReport | CertificateReport | xr.Dataset, path: str | None,
) -> pd.DataFrame:
    """Write the tabular form of a report as CSV

    Gauss scans give columns u, v, G, sigma_min and τ estimates give count, frequency.

    Raises:
        InputError: The report has no tabular form
    """
    if isinstance(report, CertificateReport):
        report = report.report
    if isinstance(report, xr.Dataset):
        df = report[["G", "sigma_min"]].to_dataframe().reset_index()[["u", "v", "G", "sigma_min"]]
    elif isinstance(report, TacReport):
        df = pd.DataFrame(
            sorted(report.histogram.items()), columns=["count", "frequency"],
        ).astype({"count": int, "frequency": int})
    else:
        raise InputError(f"No tabular output for a {type(report).__name__}")

    if path is None:
        df.to_csv(sys.stdout, index=False)
    else:
        with fsspec.open(path, mode="w") as f:
            df.to_csv(f, index=False)
    return df


def _write_text(text: str, path: str | None) -> None:
    if path is None:
        typer.echo(text)
    else:
        with fsspec.open(path, mode="w") as f:
            f.write(text + "\n")
        logger.info(f"Wrote report to {path}")


@contextmanager
def _diagnostics_sink(path: str | None) -> Iterator[Callable[[PhiDiagnostics], None] | None]:
    """A callback appending one JSON line per φ, or None"""
    if path is None:
        yield None
        return
    with fsspec.open(path, mode="w") as f:

        def sink(diagnostics: PhiDiagnostics) -> None:
            f.write(diagnostics.model_dump_json() + "\n")

        yield sink


def _ellipsoid(config: RunConfig, m: int) -> UnitEllipsoid:
    if config.ellipsoid == "sheared":
        return UnitEllipsoid.sheared(m, seed=SHEARED_ELLIPSOID_SEED)
    return UnitEllipsoid.standard(m)


def _entry(config: RunConfig, default: str | None = None) -> CatalogEntry:
    name = config.entry or default
    if name is None:
        raise InputError(f"{config.command} needs --entry")
    manifest = load_manifest(config.manifest) if config.manifest else None
    return entry(name, manifest)


def _config_echo(config: RunConfig) -> dict[str, Any]:
    # The worker count does not change results, so it stays out of reproducible reports
    return config.model_dump(mode="json", exclude={"num_workers"})


def _rejections(report: Any) -> int | None:
    if isinstance(report, TacReport):
        return report.non_morse_rejections
    if isinstance(report, CertificateReport):
        return report.report.non_morse_rejections
    nested = getattr(report, "certificate", None)
    if isinstance(nested, CertificateReport):
        return nested.report.non_morse_rejections
    return None


def _run(command: str, body: Callable[[RunConfig], tuple[Any, bool]], **options: Any) -> None:
    """Load the configuration, run a command body and write its report

    The body returns the report and whether the certified statement held. Errors map onto
    exit codes: 1 for input errors, 2 for failed verdicts, 3 for numerical pathologies.
    """
    no_timing = options.pop("no_timing", False)
    config_path = options.pop("config_path", None)
    try:
        config = load_run_config(config_path, command=command, **options)
        if no_timing:
            config = config.model_copy(update={"record_timing": False})
        logger.info(f"Running {command} with affine_tac {__version__}")

        start = time.perf_counter()
        report, held = body(config)
        elapsed = time.perf_counter() - start

        if config.output_format == "csv":
            emit_plot_data(report, config.output)
        else:
            payload = report.model_dump(mode="json")
            envelope = ReportEnvelope(
                tool_version=__version__,
                command=command,
                config=_config_echo(config),
                seed=config.seed,
                wall_clock_seconds=round(elapsed, 3) if config.record_timing else None,
                rejections=_rejections(report),
                report=payload,
            )
            _write_text(envelope.model_dump_json(indent=2), config.output)
    except InputError as e:
        logger.error(f"Input error: {e}")
        raise typer.Exit(code=EXIT_INPUT) from e
    except VerdictError as e:
        logger.error(f"Verdict failed: {e}")
        raise typer.Exit(code=EXIT_VERDICT) from e
    except (DegenerateError, PathologyError) as e:
        logger.error(f"Numerical pathology: {e}")
        raise typer.Exit(code=EXIT_PATHOLOGY) from e

    if not held:
        raise typer.Exit(code=EXIT_VERDICT)


# ---------------------------------------------------------------------------
# COMMANDS


@cli.command()
def tac(
    entry_name: Entry = None, manifest: Manifest = None, samples: Samples = None, seed: Seed = None,
    config_path: ConfigPath = None, output: Output = None, output_format: Format = None,
    workers: Workers = None, diagnostics: Diagnostics = None, no_timing: NoTiming = False,
    ellipsoid: Ellipsoid = None,
) -> None:
    """Estimate the total absolute curvature of a catalog entry"""

    def body(config: RunConfig) -> tuple[TacReport, bool]:
        item = _entry(config)
        with _diagnostics_sink(config.diagnostics) as sink:
            report = estimate_tau(
                item.atlas, item.frame, _ellipsoid(config, item.atlas.m), config.sample_count,
                config.seed, config.search, config.tolerances, config.num_workers, sink,
            )
        validate_tac_report(report, item.atlas.euler, logger.warning)
        return report, True

    _run(
        "tac", body, entry=entry_name, manifest=manifest, sample_count=samples, seed=seed,
        config_path=config_path, output=output, output_format=output_format, num_workers=workers,
        diagnostics=diagnostics, no_timing=no_timing, ellipsoid=ellipsoid,
    )


@cli.command("certify-minimal")
def certify_minimal_command(
    entry_name: Entry = None, manifest: Manifest = None, samples: Samples = None, seed: Seed = None,
    config_path: ConfigPath = None, output: Output = None, output_format: Format = None,
    workers: Workers = None, diagnostics: Diagnostics = None, no_timing: NoTiming = False,
    ellipsoid: Ellipsoid = None,
) -> None:
    """Search for a direction with more than two critical points"""

    def body(config: RunConfig) -> tuple[CertificateReport, bool]:
        item = _entry(config)
        with _diagnostics_sink(config.diagnostics) as sink:
            certificate = certify_minimal(
                item.atlas, item.frame, _ellipsoid(config, item.atlas.m), config.sample_count,
                config.seed, config.search, config.tolerances, config.num_workers, sink,
            )
        return certificate, True

    _run(
        "certify-minimal", body, entry=entry_name, manifest=manifest, sample_count=samples,
        seed=seed, config_path=config_path, output=output, output_format=output_format,
        num_workers=workers, diagnostics=diagnostics, no_timing=no_timing, ellipsoid=ellipsoid,
    )


@cli.command()
def convexity(
    entry_name: Entry = None, manifest: Manifest = None, config_path: ConfigPath = None,
    output: Output = None, no_timing: NoTiming = False, ellipsoid: Ellipsoid = None,
    resolution: Resolution = None,
) -> None:
    """Check that every sampled tangent hyperplane supports the image"""

    def body(config: RunConfig) -> tuple[BaseModel, bool]:
        item = _entry(config)
        atlas, frame = item.atlas, item.frame
        hull = affine_hull_dim(atlas, config.sample_resolution, config.tolerances.hull_rank_tol)
        if hull.dimension < atlas.m:
            reduced = reduce_to_hull(atlas, frame, hull, config.sample_resolution)
            atlas, frame = reduced.atlas, reduced.frame
        report = convexity_certify(
            atlas, frame, _ellipsoid(config, atlas.m), config.sample_resolution,
            config.tolerances.supp_tol,
        )
        return report, True

    _run(
        "convexity", body, entry=entry_name, manifest=manifest, config_path=config_path,
        output=output, no_timing=no_timing, ellipsoid=ellipsoid, sample_resolution=resolution,
    )


@cli.command()
def reduce(
    entry_name: Entry = None, manifest: Manifest = None, config_path: ConfigPath = None,
    output: Output = None, no_timing: NoTiming = False, resolution: Resolution = None,
) -> None:
    """Reduce the codimension of an entry down to its affine hull"""

    def body(config: RunConfig) -> tuple[ReductionSummary, bool]:
        item = _entry(config)
        hull = affine_hull_dim(
            item.atlas, config.sample_resolution, config.tolerances.hull_rank_tol,
        )
        reduced = reduce_to_hull(item.atlas, item.frame, hull, config.sample_resolution)
        steps, step = 1, reduced
        while step.parent is not None:
            steps, step = steps + 1, step.parent
        summary = ReductionSummary(
            atlas=item.name,
            hull_dim=hull.dimension,
            reduced_dim=reduced.dim,
            steps=steps,
            xi=reduced.xi.tolist(),
            base_point=reduced.base_point.tolist(),
            max_nabla_theta=reduced.equiaffine.max_nabla_theta,
        )
        return summary, reduced.equiaffine.max_nabla_theta <= config.tolerances.equiaffine_tol

    _run(
        "reduce", body, entry=entry_name, manifest=manifest, config_path=config_path,
        output=output, no_timing=no_timing, sample_resolution=resolution,
    )


@cli.command()
def theorem(
    entry_name: Entry = None, manifest: Manifest = None, samples: Samples = None, seed: Seed = None,
    config_path: ConfigPath = None, output: Output = None, workers: Workers = None,
    no_timing: NoTiming = False, ellipsoid: Ellipsoid = None, resolution: Resolution = None,
) -> None:
    """Evaluate both sides of: τ = 2 iff the image is a convex hypersurface of an (n+1)-plane"""

    def body(config: RunConfig) -> tuple[BaseModel, bool]:
        item = _entry(config)
        S = _ellipsoid(config, item.atlas.m)
        record = main_theorem_check(item.atlas, item.frame, S, config)
        if record.tau_preserved is False:
            logger.warning(f"τ of {item.name} changed under codimension reduction")
        return record, record.agreement

    _run(
        "theorem", body, entry=entry_name, manifest=manifest, sample_count=samples, seed=seed,
        config_path=config_path, output=output, num_workers=workers, no_timing=no_timing,
        ellipsoid=ellipsoid, sample_resolution=resolution,
    )


@cli.command()
def kossowski(
    entry_name: Entry = None, manifest: Manifest = None, config_path: ConfigPath = None,
    output: Output = None, no_timing: NoTiming = False,
) -> None:
    """Check β > 0 and λ'(0) on the degenerate circle of Σ"""

    def body(config: RunConfig) -> tuple[BaseModel, bool]:
        report = kossowski_check(_entry(config, default="sigma_kossowski"))
        return report, report.beta_positive

    _run(
        "kossowski", body, entry=entry_name, manifest=manifest, config_path=config_path,
        output=output, no_timing=no_timing,
    )


@cli.command("gauss-scan")
def gauss_scan_command(
    entry_name: Entry = None, manifest: Manifest = None, config_path: ConfigPath = None,
    output: Output = None, output_format: Format = None, no_timing: NoTiming = False,
    ellipsoid: Ellipsoid = None, chart: ChartId = None, resolution: Resolution = None,
) -> None:
    """Scan G and σ_min(dν) over one chart of a surface"""

    def body(config: RunConfig) -> tuple[Any, bool]:
        item = _entry(config)
        chart_id = config.chart or item.atlas.charts[0].id
        S = _ellipsoid(config, item.atlas.m)
        ds = gauss_scan(item.atlas, item.frame, S, chart_id, config.scan_resolution)
        if config.output_format == "csv":
            return ds, True

        abs_g = np.abs(ds["G"].values)
        sigma = ds["sigma_min"].values
        g_at = np.unravel_index(np.nanargmin(abs_g), abs_g.shape)
        s_at = np.unravel_index(np.nanargmin(sigma), sigma.shape)
        summary = GaussScanSummary(
            atlas=item.name,
            chart=chart_id,
            points=int(abs_g.size),
            min_abs_G=float(abs_g[g_at]),
            argmin_abs_G=[float(ds.u.values[g_at[0]]), float(ds.v.values[g_at[1]])],
            min_sigma_min=float(sigma[s_at]),
            argmin_sigma_min=[float(ds.u.values[s_at[0]]), float(ds.v.values[s_at[1]])],
        )
        return summary, True

    _run(
        "gauss-scan", body, entry=entry_name, manifest=manifest, config_path=config_path,
        output=output, output_format=output_format, no_timing=no_timing, ellipsoid=ellipsoid,
        chart=chart, scan_resolution=resolution,
    )


@cli.command("list")
def list_command(manifest: Manifest = None, output: Output = None) -> None:
    """Print every catalog entry with its ground truth as JSON"""
    try:
        catalog = load_manifest(manifest)
    except InputError as e:
        logger.error(f"Input error: {e}")
        raise typer.Exit(code=EXIT_INPUT) from e
    _write_text(catalog.model_dump_json(indent=2), output)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
