"""Catalog of immersions with known answers, described by entries.yaml"""

from affine_tac.catalog.builder import (
    FORMS,
    CatalogEntry,
    build_atlas,
    build_frame,
    entry,
    list_entries,
)
from affine_tac.catalog.checks import KossowskiReport, kossowski_check
from affine_tac.catalog.pydantic_models import (
    EntrySpec,
    FrameSpec,
    KnownFacts,
    Manifest,
    load_manifest,
)
from affine_tac.surfaces.kossowski import (
    E,
    F,
    beta,
    beta_printed,
    delta,
    lambda_closed_form,
    xi_plus,
)

__all__ = [
    "FORMS",
    "CatalogEntry",
    "E",
    "EntrySpec",
    "F",
    "FrameSpec",
    "KnownFacts",
    "KossowskiReport",
    "Manifest",
    "beta",
    "beta_printed",
    "build_atlas",
    "build_frame",
    "delta",
    "entry",
    "kossowski_check",
    "lambda_closed_form",
    "list_entries",
    "load_manifest",
    "xi_plus",
]
