"""Uniform result records for the verification routines.

Every ``verify_*`` function in this package returns a plain dict with the
same shape so the command line front end can aggregate them:

    {"check": str, "params": dict, "status": "pass" | "fail" | "skipped"
        | "inconclusive",
     "counts": {"instances": int, "failures": int, "skipped": int},
     "witness": ...}        # key present only when status == "fail"

``status`` is derived from the failure count unless forced; a witness is
attached exactly when the check fails.
"""

from __future__ import annotations

from typing import Any

Report = dict[str, Any]


def make_report(
    check: str,
    params: dict[str, Any],
    instances: int,
    failures: int,
    skipped: int = 0,
    witness: Any = None,
    status: str | None = None,
    extra: dict[str, Any] | None = None,
) -> Report:
    """Assemble a result record.

    ``status`` may be forced to ``"skipped"`` or ``"inconclusive"``; otherwise
    it is ``"pass"`` iff ``failures == 0``.  The witness is kept only on
    failure, so ``"witness" in report`` is equivalent to failure.
    """
    if status is None:
        status = "pass" if failures == 0 else "fail"
    if status not in ("pass", "fail", "skipped", "inconclusive"):
        raise ValueError(f"bad status {status!r}")
    if status == "fail" and witness is None:
        witness = "unspecified failure"
    rep: Report = {
        "check": check,
        "params": params,
        "status": status,
        "counts": {"instances": instances, "failures": failures, "skipped": skipped},
    }
    if status == "fail":
        rep["witness"] = witness
    if extra:
        for key, val in extra.items():
            if key in rep:
                raise ValueError(f"extra key {key!r} collides with a report field")
            rep[key] = val
    return rep


def passed(rep: Report) -> bool:
    return rep["status"] == "pass"
