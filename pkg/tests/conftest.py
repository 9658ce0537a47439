"""Shared assertions for report-producing checks."""

from __future__ import annotations


def assert_report_passes(rep: dict, require_instances: bool = True) -> None:
    """Fail with the report's own witness if a check did not pass."""
    assert rep["status"] == "pass", (
        f"{rep['check']} {rep['params']} -> {rep['status']}, "
        f"counts={rep['counts']}, witness={rep.get('witness')}"
    )
    if require_instances:
        assert rep["counts"]["instances"] > 0, (
            f"{rep['check']} {rep['params']} passed vacuously"
        )


def assert_report_fails(rep: dict) -> None:
    """Negative controls must fail and carry a witness."""
    assert rep["status"] == "fail", (
        f"{rep['check']} {rep['params']} -> {rep['status']}, expected fail"
    )
    assert rep.get("witness") is not None, (
        f"{rep['check']} failed without a witness"
    )
