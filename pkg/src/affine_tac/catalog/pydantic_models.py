"""Pydantic models for the catalog manifest"""
import logging
from importlib.resources import files
from typing import Any, Literal

import fsspec
from pyaml_env import parse_config
from pydantic import BaseModel, Field, field_validator

from affine_tac.exceptions import InputError

log = logging.getLogger(__name__)


class FrameSpec(BaseModel):
    """A transversal frame built from one of the analytic constructions"""

    kind: Literal["position", "euclidean_normal", "constant", "stacked"] = Field(
        ..., title="Kind", description="Frame construction",
    )
    params: dict[str, Any] = Field(
        default_factory=dict, title="Parameters",
        description="Keyword arguments of the construction",
    )
    parts: list["FrameSpec"] = Field(
        default_factory=list, title="Parts", description="Frames stacked by the stacked kind",
    )


class KnownFacts(BaseModel):
    """Ground truth of an entry"""

    tau: float | None = Field(None, title="Tau", description="Total absolute curvature")
    convex: bool | None = Field(None, title="Convex", description="Whether the image is convex")
    hull_dim: int | None = Field(
        None, title="Hull dimension", description="Dimension of the affine hull",
    )
    betti: list[int] = Field(
        default_factory=list, title="Betti numbers", description="b_0, …, b_n of the manifold",
    )
    euler: int | None = Field(None, title="Euler characteristic", description="χ(M)")
    degeneracy_locus: str | None = Field(
        None, title="Degeneracy locus", description="Where the affine fundamental form degenerates",
    )


class EntrySpec(BaseModel):
    """One catalog entry"""

    name: str = Field(..., title="Entry name", description="The name of the entry")
    form: str = Field(..., title="Form", description="Identifier of the analytic immersion")
    params: dict[str, Any] = Field(
        default_factory=dict, title="Parameters", description="Keyword arguments of the form",
    )
    frame: FrameSpec = Field(..., title="Frame", description="The transversal frame")
    known: KnownFacts = Field(default_factory=KnownFacts, title="Known", description="Ground truth")
    description: str | None = Field(None, title="Description", description="Free text")


class Manifest(BaseModel):
    """A group of catalog entries"""

    entries: list[EntrySpec] = Field(..., title="Entries", description="The catalog entries")

    @field_validator("entries")
    @classmethod
    def name_must_be_unique(cls, v: list[EntrySpec]) -> list[EntrySpec]:
        """Ensure that all entry names are unique"""
        names = [entry.name for entry in v]
        if len(names) != len(set(names)):
            raise ValueError(f"Entry names must be unique, names are {names}")
        return v


def load_manifest(path: str | None = None) -> Manifest:
    """Load a catalog manifest, the built-in one if no path is given

    Args:
        path: Local or remote path of a YAML manifest
    """
    filename = path or str(files("affine_tac.catalog").joinpath("entries.yaml"))
    try:
        with fsspec.open(filename, mode="r") as stream:
            manifest_dict = parse_config(data=stream)
        return Manifest(**manifest_dict)
    except FileNotFoundError as e:
        raise InputError(f"Manifest {filename} not found") from e
    except ValueError as config_error:
        log.error(f"Error parsing catalog manifest: {config_error}")
        raise InputError(f"Invalid catalog manifest {filename}: {config_error}") from config_error
