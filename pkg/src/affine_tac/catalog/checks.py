"""Checks of catalog entries against their closed forms"""

import logging

import numpy as np
from pydantic import BaseModel, Field

from affine_tac.catalog.builder import CatalogEntry
from affine_tac.equiaffine import decompose_batch
from affine_tac.exceptions import InputError, VerdictError
from affine_tac.manifold import eval_jets
from affine_tac.surfaces.kossowski import U_STAR, beta, beta_printed, profile_derivatives

logger = logging.getLogger(__name__)

# Step of the central difference for λ'(0)
LAMBDA_STEP = 1e-4


class KossowskiReport(BaseModel):
    """Degeneracy of the affine fundamental form of Σ along u = 0"""

    beta_positive: bool = Field(
        ..., title="β positive", description="β > 0 on the sampled interval",
    )
    beta_min: float = Field(..., title="β min", description="Smallest sampled β")
    det_alpha_at_0: float = Field(..., title="det α(0)", description="|det α_ξ| at u = 0")
    lambda_at_0: float = Field(..., title="λ(0)")
    dlambda_at_0: float = Field(..., title="λ'(0)", description="Central difference of λ at 0")
    closed_form_max_rel_error: float = Field(
        ..., title="Closed-form error",
        description="Largest relative gap between computed and closed-form β",
    )
    printed_form_max_rel_error: float = Field(
        ..., title="Printed-form error",
        description="Largest relative gap between the published form and β E²",
    )
    sample_count: int = Field(..., title="Sample count", description="Sampled values of u")


def _det_alpha(entry: CatalogEntry, u: np.ndarray) -> np.ndarray:
    chart = entry.atlas.chart("f_plus")
    params = np.stack([u, np.zeros_like(u)], axis=-1)
    fd = decompose_batch(eval_jets(chart, params), entry.frame)
    return np.linalg.det(fd.alpha[..., 0])


def kossowski_check(entry: CatalogEntry, sample_count: int = 200) -> KossowskiReport:
    """Recompute β = det α_ξ / u² on f_+ and compare it with its closed form

    The u-grid holds cell centres of the chart interval; an even count keeps u = 0 out.

    Raises:
        InputError: The entry has no f_plus chart
        VerdictError: β ≤ 0 somewhere on the grid
    """
    if "f_plus" not in {chart.id for chart in entry.atlas.charts}:
        raise InputError(f"Entry {entry.name} has no f_plus chart; it is not Σ")
    if sample_count < 2 or sample_count % 2:
        raise InputError(f"sample_count must be even and at least 2, got {sample_count}")

    collar = entry.atlas.metadata.get("collar", 0.0)
    half = U_STAR - collar
    u = -half + (np.arange(sample_count) + 0.5) * (2 * half / sample_count)

    beta_computed = _det_alpha(entry, u) / u**2
    bad = np.flatnonzero(beta_computed <= 0)
    if bad.size:
        first = bad[0]
        raise VerdictError(
            f"β = {beta_computed[first]:.3e} ≤ 0 at u = {u[first]:.6f} on {entry.name}",
        )

    expected = beta(u)
    rel_error = float(np.max(np.abs(beta_computed - expected) / expected))
    printed = beta_printed(u) / (expected * profile_derivatives(u)["E"] ** 2)
    printed_error = float(np.max(np.abs(printed - 1)))

    det_0, det_minus, det_plus = _det_alpha(entry, np.array([0.0, -LAMBDA_STEP, LAMBDA_STEP]))
    lam_0, lam_minus, lam_plus = np.sign([0.0, -LAMBDA_STEP, LAMBDA_STEP]) * np.sqrt(
        np.maximum([det_0, det_minus, det_plus], 0.0),
    )
    report = KossowskiReport(
        beta_positive=True,
        beta_min=float(np.min(beta_computed)),
        det_alpha_at_0=float(abs(det_0)),
        lambda_at_0=float(lam_0),
        dlambda_at_0=float((lam_plus - lam_minus) / (2 * LAMBDA_STEP)),
        closed_form_max_rel_error=rel_error,
        printed_form_max_rel_error=printed_error,
        sample_count=sample_count,
    )
    logger.info(
        f"Σ: β_min = {report.beta_min:.4f}, λ'(0) = {report.dlambda_at_0:.6f}, "
        f"closed-form error {rel_error:.2e}",
    )
    return report
