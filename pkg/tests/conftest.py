import os
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"

_ACCEPTANCE_LINES: list[str] = []


def taylor_expm(M, terms=30):
    """Truncated power series sum_{t < terms} M^t / t!."""
    M = np.asarray(M, dtype=float)
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for t in range(1, terms):
        term = term @ M / t
        out = out + term
    return out


def random_graph_adjacency(rng, n, p=0.3, weighted=True):
    upper = np.triu(rng.random((n, n)) < p, 1)
    w = rng.uniform(0.5, 2.0, (n, n)) if weighted else np.ones((n, n))
    A = np.where(upper, w, 0.0)
    A = A + A.T
    # Chain edges keep the graph connected.
    for i in range(n - 1):
        if A[i, i + 1] == 0:
            A[i, i + 1] = A[i + 1, i] = 1.0
    return A


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def data_dir():
    path = os.environ.get("ATTRIKERNEL_DATA")
    if not path or not Path(path).is_dir():
        pytest.fail(
            "benchmark corpora not available: set ATTRIKERNEL_DATA to a directory holding "
            "the LINQS WebKB (cornell/texas/washington/wisconsin), citeseer and cora "
            ".content/.cites files",
            pytrace=False,
        )
    return Path(path)


@pytest.fixture
def record():
    """Log one acceptance verdict line and assert it."""

    def _record(criterion, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _record


def pytest_runtest_makereport(item, call):
    if call.when in ("setup", "call") and call.excinfo is not None and item.get_closest_marker("acceptance"):
        crit = item.get_closest_marker("acceptance").kwargs.get("criterion")
        if crit is not None and not any(f"criterion {crit}:" in ln for ln in _ACCEPTANCE_LINES):
            msg = str(call.excinfo.value).splitlines()[0] if str(call.excinfo.value) else call.excinfo.typename
            _ACCEPTANCE_LINES.append(f"[FAIL] criterion {crit}: {msg}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
