import json

import pandas as pd
import pytest
from typer.testing import CliRunner

from affine_tac import app
from affine_tac.app import EXIT_INPUT, EXIT_PATHOLOGY, EXIT_VERDICT, cli, emit_plot_data
from affine_tac.exceptions import InputError, PathologyError
from affine_tac.tac import TacReport

runner = CliRunner()


@pytest.fixture()
def fast_config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("search:\n  seed_resolution: 48\nsample_resolution: 12\n")
    return str(path)


def test_list():
    result = runner.invoke(cli, ["list"])
    assert result.exit_code == 0
    names = [item["name"] for item in json.loads(result.stdout)["entries"]]
    assert names == [
        "sphere_centroaffine_n2",
        "sphere_centroaffine_n3",
        "sphere_in_R4",
        "sigma_kossowski",
        "torus_revolution",
        "dumbbell",
    ]


def test_tac_sphere(fast_config):
    result = runner.invoke(
        cli,
        ["tac", "--entry", "sphere_centroaffine_n2", "--samples", "20", "--seed", "7",
         "--config", fast_config],
    )
    assert result.exit_code == 0
    envelope = json.loads(result.stdout)
    assert envelope["command"] == "tac"
    assert envelope["seed"] == 7
    assert envelope["rejections"] == 0
    assert envelope["wall_clock_seconds"] is not None
    assert envelope["config"]["entry"] == "sphere_centroaffine_n2"
    assert "num_workers" not in envelope["config"]
    assert envelope["report"]["tau_estimate"] == 2.0
    assert envelope["report"]["histogram"] == {"2": 20}


def test_reports_are_reproducible(fast_config):
    args = ["tac", "--entry", "torus_revolution", "--samples", "10", "--config", fast_config,
            "--no-timing"]
    first = runner.invoke(cli, [*args, "--workers", "0"])
    second = runner.invoke(cli, [*args, "--workers", "2"])
    assert first.exit_code == second.exit_code == 0
    assert first.stdout == second.stdout
    assert json.loads(first.stdout)["wall_clock_seconds"] is None


def test_tac_csv(fast_config):
    result = runner.invoke(
        cli,
        ["tac", "--entry", "torus_revolution", "--samples", "10", "--config", fast_config,
         "--format", "csv"],
    )
    assert result.exit_code == 0
    assert result.stdout.splitlines() == ["count,frequency", "4,10"]


def test_certify_minimal_torus_exits_with_witness(fast_config):
    result = runner.invoke(
        cli,
        ["certify-minimal", "--entry", "torus_revolution", "--samples", "5", "--config",
         fast_config],
    )
    assert result.exit_code == 0
    report = json.loads(result.stdout)["report"]
    assert not report["minimal"]
    assert report["witness"]["count"] == 4


def test_theorem_torus(fast_config):
    result = runner.invoke(
        cli,
        ["theorem", "--entry", "torus_revolution", "--samples", "10", "--config", fast_config],
    )
    assert result.exit_code == 0
    report = json.loads(result.stdout)["report"]
    assert report["agreement"]
    assert not report["minimal"]
    assert not report["convex"]


def test_convexity_reduces_first(fast_config):
    result = runner.invoke(cli, ["convexity", "--entry", "sphere_in_R4", "--config", fast_config])
    assert result.exit_code == 0
    assert json.loads(result.stdout)["report"]["convex"]


def test_reduce(fast_config):
    result = runner.invoke(cli, ["reduce", "--entry", "sphere_in_R4", "--config", fast_config])
    assert result.exit_code == 0
    report = json.loads(result.stdout)["report"]
    assert report["hull_dim"] == report["reduced_dim"] == 3
    assert report["steps"] == 1


def test_reduce_full_dimensional_exits_input(fast_config):
    result = runner.invoke(cli, ["reduce", "--entry", "torus_revolution", "--config", fast_config])
    assert result.exit_code == EXIT_INPUT


def test_kossowski():
    result = runner.invoke(cli, ["kossowski", "--no-timing"])
    assert result.exit_code == 0
    report = json.loads(result.stdout)["report"]
    assert report["beta_positive"]
    assert report["dlambda_at_0"] == pytest.approx(3**0.5, rel=1e-3)
    assert report["closed_form_max_rel_error"] < 1e-6


def test_gauss_scan(fast_config):
    result = runner.invoke(
        cli,
        ["gauss-scan", "--entry", "sigma_kossowski", "--chart", "f_plus", "--resolution", "16",
         "--config", fast_config],
    )
    assert result.exit_code == 0
    summary = json.loads(result.stdout)["report"]
    assert summary["chart"] == "f_plus"
    assert summary["points"] == 256
    assert summary["min_abs_G"] >= 0


def test_gauss_scan_csv(tmp_path, fast_config):
    output = str(tmp_path / "scan.csv")
    result = runner.invoke(
        cli,
        ["gauss-scan", "--entry", "torus_revolution", "--resolution", "8", "--format", "csv",
         "--output", output, "--config", fast_config],
    )
    assert result.exit_code == 0
    df = pd.read_csv(output)
    assert list(df.columns) == ["u", "v", "G", "sigma_min"]
    assert len(df) == 64


def test_diagnostics_file(tmp_path, fast_config):
    path = tmp_path / "phi.jsonl"
    result = runner.invoke(
        cli,
        ["tac", "--entry", "sphere_centroaffine_n2", "--samples", "6", "--diagnostics", str(path),
         "--config", fast_config],
    )
    assert result.exit_code == 0
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(lines) == 6
    assert all(line["count"] == 2 for line in lines)


def test_input_errors_exit_one():
    assert runner.invoke(cli, ["tac", "--entry", "klein_bottle"]).exit_code == EXIT_INPUT
    assert runner.invoke(cli, ["tac"]).exit_code == EXIT_INPUT
    assert runner.invoke(cli, ["tac", "--entry", "dumbbell", "--ellipsoid", "round"]).exit_code == (
        EXIT_INPUT
    )
    assert runner.invoke(cli, ["list", "--manifest", "/no/such/manifest.yaml"]).exit_code == (
        EXIT_INPUT
    )


def test_pathology_exits_three(monkeypatch):
    def failing(*args, **kwargs):
        raise PathologyError("every height function was degenerate")

    monkeypatch.setattr(app, "estimate_tau", failing)
    result = runner.invoke(cli, ["tac", "--entry", "torus_revolution"])
    assert result.exit_code == EXIT_PATHOLOGY


def test_failed_verdict_exits_two(monkeypatch, fast_config):
    def below_two(*args, **kwargs):
        return TacReport(
            atlas="torus_revolution", tau_estimate=1.0, stderr=0.0, histogram={1: 3},
            non_morse_rejections=0, sample_count=3, ellipsoid="standard", frame="normal", seed=0,
        )

    monkeypatch.setattr(app, "estimate_tau", below_two)
    result = runner.invoke(cli, ["tac", "--entry", "torus_revolution", "--config", fast_config])
    assert result.exit_code == EXIT_VERDICT


def test_emit_plot_data_empty_histogram():
    report = TacReport(
        atlas="empty", tau_estimate=0.0, stderr=0.0, histogram={}, non_morse_rejections=0,
        sample_count=0, ellipsoid="standard", frame="position", seed=0,
    )
    df = emit_plot_data(report, None)
    assert list(df.columns) == ["count", "frequency"]
    assert df.empty
    with pytest.raises(InputError):
        emit_plot_data({"tau": 2.0}, None)
