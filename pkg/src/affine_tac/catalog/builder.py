"""Build atlases and frames from manifest entries"""

import dataclasses
import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

from affine_tac.catalog.pydantic_models import (
    EntrySpec,
    FrameSpec,
    KnownFacts,
    Manifest,
    load_manifest,
)
from affine_tac.equiaffine import (
    TransversalFrame,
    constant_frame,
    euclidean_normal_frame,
    position_frame,
    stacked_frame,
)
from affine_tac.exceptions import InputError
from affine_tac.manifold import Atlas
from affine_tac.surfaces.dumbbell import dumbbell_atlas
from affine_tac.surfaces.kossowski import sigma_atlas
from affine_tac.surfaces.sphere import spherical_atlas, sphere_in_r4_atlas, stereographic_atlas
from affine_tac.surfaces.torus import torus_atlas

logger = logging.getLogger(__name__)

FORMS: dict[str, Callable[..., Atlas]] = {
    "sphere.spherical": spherical_atlas,
    "sphere.stereographic": stereographic_atlas,
    "sphere.in_r4": sphere_in_r4_atlas,
    "torus.revolution": torus_atlas,
    "dumbbell": dumbbell_atlas,
    "kossowski.sigma": sigma_atlas,
}


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    """An immersion with its frame and ground truth"""

    name: str
    atlas: Atlas
    frame: TransversalFrame
    known: KnownFacts
    spec: EntrySpec


def build_frame(spec: FrameSpec) -> TransversalFrame:
    """Construct the transversal frame a FrameSpec describes"""
    params: dict[str, Any] = dict(spec.params)
    try:
        match spec.kind:
            case "position":
                return position_frame(**params)
            case "euclidean_normal":
                return euclidean_normal_frame(**params)
            case "constant":
                return constant_frame(**params)
            case "stacked":
                if params:
                    raise InputError("A stacked frame takes parts, not parameters")
                return stacked_frame(*(build_frame(part) for part in spec.parts))
    except TypeError as e:
        raise InputError(f"Invalid parameters for a {spec.kind} frame: {e}") from e
    raise InputError(f"Unknown frame kind {spec.kind}")


def build_atlas(spec: EntrySpec) -> Atlas:
    """Construct the atlas of an entry, renamed after it and carrying its Betti numbers"""
    if spec.form not in FORMS:
        raise InputError(
            f"Unknown form {spec.form} in entry {spec.name}; known forms are {sorted(FORMS)}",
        )
    try:
        atlas = FORMS[spec.form](**spec.params)
    except TypeError as e:
        raise InputError(f"Invalid parameters for form {spec.form}: {e}") from e

    betti = tuple(spec.known.betti) if spec.known.betti else atlas.betti
    euler = spec.known.euler
    if euler is None and betti is not None:
        euler = sum((-1) ** k * b for k, b in enumerate(betti))
    return dataclasses.replace(atlas, name=spec.name, betti=betti, euler=euler)


def list_entries(manifest: Manifest | None = None) -> list[str]:
    """Names of the entries in a manifest, the built-in one by default"""
    manifest = manifest or load_manifest()
    return [spec.name for spec in manifest.entries]


def entry(name: str, manifest: Manifest | None = None) -> CatalogEntry:
    """Look up and build a catalog entry

    Raises:
        InputError: The name is not in the manifest
    """
    manifest = manifest or load_manifest()
    specs = {spec.name: spec for spec in manifest.entries}
    if name not in specs:
        raise InputError(f"Unknown entry {name}; known entries are {sorted(specs)}")
    spec = specs[name]
    logger.debug(f"Building catalog entry {name} from form {spec.form}")
    return CatalogEntry(
        name=name,
        atlas=build_atlas(spec),
        frame=build_frame(spec.frame),
        known=spec.known,
        spec=spec,
    )
