"""Shared sink for acceptance-gate result lines.

The gate tests record one line per criterion here; the conftest terminal
summary hook prints them after the run, so the pass/fail lines are visible
even though pytest captures stdout.
"""

from __future__ import annotations

LINES: list[str] = []


def record(criterion: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    LINES.append(f"{status}  criterion {criterion}: {detail}")
