"""Shared fixtures and the acceptance summary printed at the end of a run."""

from __future__ import annotations

import numpy as np
import pytest

# criterion number -> list of (sub-check name, passed, detail)
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def record(criterion: int, name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((name, bool(passed), detail))
    print(f"ACCEPTANCE {criterion} [{name}]: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[crit]
        ok = all(p for _, p, _ in checks)
        detail = "; ".join(f"{n}: {'ok' if p else 'FAILED'} ({d})" for n, p, d in checks)
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)
