"""Tests for building catalog entries"""
import numpy as np
import pytest

from affine_tac.catalog import (
    FORMS,
    FrameSpec,
    build_frame,
    entry,
    kossowski_check,
    list_entries,
    load_manifest,
)
from affine_tac.exceptions import InputError


def test_list_entries():
    assert len(list_entries()) == 6
    assert set(FORMS) >= {spec.form for spec in load_manifest().entries}


def test_entries_are_renamed(torus_entry, sphere_n3_entry):
    assert torus_entry.atlas.name == "torus_revolution"
    assert torus_entry.atlas.euler == 0
    assert torus_entry.frame.id == "euclidean_normal"
    assert sphere_n3_entry.atlas.euler == 0
    assert sphere_n3_entry.atlas.n == 3


def test_every_entry_builds():
    for name in list_entries():
        item = entry(name)
        assert item.atlas.name == name
        assert item.atlas.m == item.atlas.n + item.frame.rank


def test_unknown_entry():
    with pytest.raises(InputError):
        entry("klein_bottle")


def test_user_entry(tmp_path):
    path = tmp_path / "manifest.yaml"
    path.write_text(
        "entries:\n"
        "  - name: bad_params\n"
        "    form: torus.revolution\n"
        "    params:\n"
        "      radius: 3.0\n"
        "    frame:\n"
        "      kind: euclidean_normal\n"
        "  - name: bad_form\n"
        "    form: klein.bottle\n"
        "    frame:\n"
        "      kind: position\n",
    )
    manifest = load_manifest(str(path))
    with pytest.raises(InputError):
        entry("bad_params", manifest)
    with pytest.raises(InputError):
        entry("bad_form", manifest)


def test_build_frame():
    frame = build_frame(FrameSpec(kind="constant", params={"vectors": [[0, 0, 1]]}))
    assert frame.rank == 1
    with pytest.raises(InputError):
        build_frame(FrameSpec(kind="position", params={"radius": 1}))
    with pytest.raises(InputError):
        build_frame(FrameSpec(kind="stacked", params={"center": [0, 0, 0]}))


def test_kossowski_check(sigma_entry):
    report = kossowski_check(sigma_entry)
    assert report.beta_positive
    assert report.beta_min > 0
    assert report.det_alpha_at_0 < 1e-12
    assert report.lambda_at_0 == 0
    assert report.dlambda_at_0 == pytest.approx(np.sqrt(3), rel=1e-3)
    assert report.closed_form_max_rel_error < 1e-6
    assert report.printed_form_max_rel_error < 1e-8
    assert report.sample_count == 200


def test_kossowski_check_input_errors(sigma_entry, torus_entry):
    with pytest.raises(InputError):
        kossowski_check(torus_entry)
    with pytest.raises(InputError):
        kossowski_check(sigma_entry, sample_count=7)
