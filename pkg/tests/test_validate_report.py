import logging

import pytest

from affine_tac.exceptions import VerdictError
from affine_tac.tac import TacReport
from affine_tac.validate_report import validate_tac_report


def make_report(histogram, rejections=0, violations=0, stderr=0.0):
    samples = sum(histogram.values())
    return TacReport(
        atlas="test_surface",
        tau_estimate=sum(k * v for k, v in histogram.items()) / samples,
        stderr=stderr,
        histogram=histogram,
        non_morse_rejections=rejections,
        sample_count=samples,
        ellipsoid="standard",
        frame="position",
        seed=0,
        index_sum_violations=violations,
    )


def test_validate_report_ok():
    """A clean sphere-like estimate passes without logs"""
    logs = []

    def dummy_logger(msg: str):
        logs.append(msg)

    validate_tac_report(make_report({2: 90, 4: 10}), euler=2, logger_func=dummy_logger)
    assert len(logs) == 0


def test_validate_report_below_two_raises():
    with pytest.raises(VerdictError) as excinfo:
        validate_tac_report(make_report({1: 5, 2: 5}), euler=None, logger_func=lambda x: None)
    assert "below the lower bound of 2" in str(excinfo.value)


def test_validate_report_low_counts_raise():
    # The mean is above 2 but some draws had a single critical point
    with pytest.raises(VerdictError) as excinfo:
        validate_tac_report(make_report({1: 1, 4: 9}), euler=None, logger_func=lambda x: None)
    assert "fewer than two critical points" in str(excinfo.value)


def test_validate_report_parity_raises():
    with pytest.raises(VerdictError) as excinfo:
        validate_tac_report(make_report({2: 8, 3: 2}), euler=2, logger_func=lambda x: None)
    assert "differ in parity" in str(excinfo.value)


def test_validate_report_parity_skipped_without_euler():
    logs = []
    validate_tac_report(make_report({2: 8, 3: 2}), euler=None, logger_func=logs.append)
    assert logs == []


def test_validate_report_warns_on_rejections(caplog):
    with caplog.at_level(logging.INFO):
        validate_tac_report(
            make_report({4: 95}, rejections=5), euler=0, logger_func=logging.info,
        )
    assert "WARNING: 5 non-Morse draws rejected on test_surface (5.0%)." in caplog.text


def test_validate_report_rejection_threshold_from_env(monkeypatch):
    monkeypatch.setenv("TAC_VALIDATE_REJECTION_WARNING", "0.1")
    logs = []
    validate_tac_report(make_report({4: 95}, rejections=5), euler=0, logger_func=logs.append)
    assert logs == []


def test_validate_report_warns_on_index_sum():
    logs = []
    validate_tac_report(make_report({2: 10}, violations=3), euler=2, logger_func=logs.append)
    assert len(logs) == 1
    assert "index sum different from χ = 2" in logs[0]
