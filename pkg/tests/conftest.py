import numpy as np
import pytest

from edgesync import build_fem, five_agent_topology


@pytest.fixture(scope="session")
def fem8():
    return build_fem(n=8)


@pytest.fixture(scope="session")
def fem40():
    return build_fem()


@pytest.fixture(scope="session")
def topo5():
    return five_agent_topology()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_stable(rng, m, margin=0.5):
    a = rng.standard_normal((m, m))
    return a - (max(np.linalg.eigvals(a).real.max(), 0.0) + margin) * np.eye(m)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def record_criterion(cid: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[cid] = f"criterion {cid:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for cid in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[cid])
