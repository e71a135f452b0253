"""
Тесты наборов проверок тождеств.
"""

import pytest

from geocume.errors import ArgumentError
from geocume.verify import (
    SuiteReport,
    cmd_verify,
    create_error_response,
    run_combinatorics,
    run_matrix,
    run_sigeom,
)


def test_error_response_creation():
    """Тестирование записи о провале"""
    assert create_error_response("Test error") == {"error": "Test error"}
    assert create_error_response("Test error", {"p": 3}) == {
        "error": "Test error",
        "details": {"p": 3},
    }

    print("✓ test_error_response_creation passed")


def test_suite_report():
    report = SuiteReport(suite="demo")
    report.record("identity", True)
    report.record("identity", False, {"case": 1})
    report.record("other", True)
    assert not report.passed
    assert report.failures == [{"error": "identity", "details": {"case": 1}}]
    frame = report.to_frame()
    assert frame.to_dict("records") == [
        {"suite": "demo", "check": "identity", "cases": 2, "failures": 1},
        {"suite": "demo", "check": "other", "cases": 1, "failures": 0},
    ]


def test_combinatorics_suite():
    report = SuiteReport(suite="combinatorics")
    run_combinatorics(report, tables=10)
    assert report.passed, report.failures
    assert report.counts["bell_count"] == 10
    assert report.counts["touchard_sum"] == 36
    assert report.counts["clustering_identity"] == 10 * 57


def test_matrix_suite_small():
    report = SuiteReport(suite="matrix")
    run_matrix(report, cases=50, audits=20)
    assert report.passed, report.failures[:3]
    assert report.counts["det_alpha_vs_lu"] == 50


def test_unknown_suite():
    with pytest.raises(ArgumentError):
        cmd_verify("geometry")


@pytest.mark.slow
def test_full_suites():
    reports = cmd_verify("all")
    assert reports[0].counts["clustering_identity"] == 100 * 57
    assert reports[2].counts["sig_connectivity"] == 10_000
    assert [report.suite for report in reports] == ["combinatorics", "matrix", "sigeom"]
    for report in reports:
        assert report.passed, (report.suite, report.failures[:3])


def test_sigeom_suite_small():
    """Набор sigeom проходит, включая точную границу объёма для d=1, p=2"""
    report = SuiteReport(suite="sigeom")
    run_sigeom(report, configs=100)
    assert report.passed, report.failures[:3]
    assert report.counts["sig_volume"] == 4
    assert report.counts["sig_connectivity"] == 100
