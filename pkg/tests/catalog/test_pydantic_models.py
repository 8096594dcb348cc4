"""Tests for the catalog manifest"""
import pytest

from affine_tac.catalog.pydantic_models import Manifest, load_manifest
from affine_tac.exceptions import InputError


def test_load_manifest():
    """The built-in manifest holds every catalog entry"""
    manifest = load_manifest()
    assert len(manifest.entries) == 6
    assert manifest.entries[0].name == "sphere_centroaffine_n2"


def test_known_facts():
    known = {spec.name: spec.known for spec in load_manifest().entries}
    assert known["torus_revolution"].tau == 4
    assert known["torus_revolution"].betti == [1, 2, 1]
    assert known["sphere_in_R4"].hull_dim == 3
    assert not known["dumbbell"].convex
    assert known["sigma_kossowski"].degeneracy_locus is not None


def test_duplicate_names_rejected():
    entry = {"name": "twice", "form": "torus.revolution", "frame": {"kind": "euclidean_normal"}}
    with pytest.raises(ValueError, match="unique"):
        Manifest(entries=[entry, entry])


def test_user_manifest(tmp_path):
    path = tmp_path / "manifest.yaml"
    path.write_text(
        "entries:\n"
        "  - name: fat_torus\n"
        "    form: torus.revolution\n"
        "    params:\n"
        "      major: 3.0\n"
        "      minor: 2.0\n"
        "    frame:\n"
        "      kind: euclidean_normal\n",
    )
    manifest = load_manifest(str(path))
    assert [spec.name for spec in manifest.entries] == ["fat_torus"]
    assert manifest.entries[0].params == {"major": 3.0, "minor": 2.0}


def test_missing_manifest():
    with pytest.raises(InputError):
        load_manifest("/no/such/manifest.yaml")


def test_invalid_manifest(tmp_path):
    path = tmp_path / "manifest.yaml"
    path.write_text("entries:\n  - name: no_form\n")
    with pytest.raises(InputError):
        load_manifest(str(path))
