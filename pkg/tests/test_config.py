import os

import pytest

from affine_tac.config import (
    RunConfig,
    SearchConfig,
    load_run_config,
    load_yaml_config,
    save_yaml_config,
)
from affine_tac.exceptions import InputError


def test_defaults():
    config = load_run_config()
    assert config == RunConfig()
    assert config.command == "tac"
    assert config.output_format == "json"
    assert config.record_timing
    assert config.search == SearchConfig()


def test_yaml_with_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("TAC_SEED", "17")
    path = tmp_path / "run.yaml"
    path.write_text(
        "entry: torus_revolution\n"
        "seed: !ENV ${TAC_SEED}\n"
        "sample_count: 40\n"
        "search:\n"
        "  seed_resolution: 24\n"
        "tolerances:\n"
        "  supp_tol: 1.0e-6\n",
    )
    config = load_run_config(str(path))
    assert config.entry == "torus_revolution"
    assert config.seed == 17
    assert config.sample_count == 40
    assert config.search.seed_resolution == 24
    assert config.tolerances.supp_tol == 1e-6


def test_overrides_take_precedence(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("seed: 4\nsample_count: 40\n")
    config = load_run_config(str(path), seed=9, sample_count=None, command="certify-minimal")
    assert config.seed == 9
    assert config.sample_count == 40
    assert config.command == "certify-minimal"


def test_invalid_config_raises(tmp_path):
    with pytest.raises(InputError):
        load_run_config(sample_count=0)
    with pytest.raises(InputError):
        load_run_config(output_format="parquet")
    path = tmp_path / "run.yaml"
    path.write_text("search:\n  seed_resolution: 1\n")
    with pytest.raises(InputError):
        load_run_config(str(path))


def test_all_but_one_worker():
    config = RunConfig(num_workers=-1)
    assert config.num_workers == max((os.cpu_count() or 1) - 1, 0)


def test_save_and_load(tmp_path):
    path = str(tmp_path / "saved.yaml")
    config = RunConfig(entry="dumbbell", seed=5, ellipsoid="sheared")
    save_yaml_config(config.model_dump(mode="json"), path)
    assert load_yaml_config(path)["entry"] == "dumbbell"
    assert load_run_config(path) == config


def test_empty_file(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_yaml_config(str(path)) == {}


def test_workers_from_env(monkeypatch):
    monkeypatch.setenv("AFFINE_TAC_NUM_WORKERS", "3")
    assert RunConfig().num_workers == 3
    assert load_run_config(num_workers=1).num_workers == 1
