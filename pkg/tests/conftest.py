import json
import time
from pathlib import Path

import pytest

from vortex_area.geometry import build_grid
from vortex_area.optimizer import minimize_joint

FROZEN = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())

_solves: dict = {}
_criteria: list = []


def solve(l: float, n: int = 129):
    """Joint minimizer on an ``n x n`` grid, cached for the whole session with its wall time."""
    key = (float(l), int(n))
    if key not in _solves:
        t0 = time.perf_counter()
        res = minimize_joint(l, build_grid(l, n, n))
        _solves[key] = (res, time.perf_counter() - t0)
    return _solves[key]


@pytest.fixture(scope="session")
def frozen():
    return FROZEN


@pytest.fixture(scope="session")
def joint():
    return solve


@pytest.fixture
def criterion():
    """Record the verdict of one clause of an acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> bool:
        _criteria.append((number, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    """Print one line per criterion; it passes only if every recorded clause passed."""
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted({c[0] for c in _criteria}):
        clauses = [c for c in _criteria if c[0] == number]
        verdict = "PASS" if all(c[1] for c in clauses) else "FAIL"
        detail = "; ".join(f"{c[2]}{'' if c[1] else ' [failed]'}" for c in clauses)
        terminalreporter.write_line(f"criterion {number}: {verdict}  {detail}")
