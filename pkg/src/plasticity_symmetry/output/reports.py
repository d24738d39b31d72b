"""
Report output: the JSON document and a short human-readable summary.
"""
from __future__ import annotations

import logging
from pathlib import Path

from ..schemas import Report

LOG = logging.getLogger(__name__)


def write_report(report: Report, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json() + "\n", encoding="utf-8")
    LOG.info("wrote %s report to %s", report.command, path)
    return path


def summarize(report: Report) -> str:
    """One line per check, then a PASS/FAIL footer."""
    lines = []
    for check in report.checks:
        mark = "ok  " if check.passed else "FAIL"
        residual = "" if check.max_residual is None else f"  max |r| = {check.max_residual:.3e}"
        lines.append(f"{mark} {check.name}{residual}")
        flags = check.detail.get("flags")
        if flags:
            lines.append(f"     {', '.join(flags)}")
        if not check.passed and check.witness:
            where = ", ".join(f"{k}={v:.6g}" for k, v in check.witness.items())
            lines.append(f"     witness: {where}")
    failed = sum(not c.passed for c in report.checks)
    verdict = "PASS" if report.passed else f"FAIL ({failed} of {len(report.checks)})"
    lines.append(f"{report.command}: {verdict}")
    return "\n".join(lines)
