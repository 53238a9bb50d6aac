import numpy as np
import pytest
from hypothesis import settings

from harmonic_lr.couplings import CouplingPair, LocalRange
from harmonic_lr.graph import path

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def chain4():
    g = path(4)
    X = 3.0 * np.eye(4) - g.adjacency
    return CouplingPair(g, X, np.eye(4), LocalRange(1))
