import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from minmaxspec import RowChoiceFamily, family_from_matrices  # noqa: E402

F2_MATRICES = [np.diag([2.0, 3.0]), np.diag([3.0, 2.0])]
F3_MATRICES = [np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([[2.0, 0.0], [0.0, 1.0]])]


@pytest.fixture
def F2():
    return family_from_matrices(F2_MATRICES)


@pytest.fixture
def F3():
    return family_from_matrices(F3_MATRICES)


def random_rows(rng, max_n=5, max_choices=2, max_entry=3):
    n = int(rng.integers(1, max_n + 1))
    return [
        rng.integers(0, max_entry + 1, size=(int(rng.integers(1, max_choices + 1)), n)).astype(float)
        for _ in range(n)
    ]


def random_family(rng, **kw):
    return RowChoiceFamily.from_rows(random_rows(rng, **kw))


def deep_family(rng, max_n=7):
    """Unit-diagonal upper-triangular-ish families: many equal-radius classes, deep chains."""
    n = int(rng.integers(2, max_n + 1))
    rows = []
    for i in range(n):
        m = int(rng.integers(1, 4))
        r = np.zeros((m, n))
        r[:, i] = rng.choice([1, 1, 1, 2], size=m)
        r[:, i + 1:] = (rng.random((m, n - i - 1)) < 0.4) * rng.integers(1, 3, size=(m, n - i - 1))
        r[:, :i] = rng.random((m, i)) < 0.05
        rows.append(r)
    return RowChoiceFamily.from_rows(rows)


# -- acceptance summary ------------------------------------------------------

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split("_")[2])):
        verdict = "PASS" if _ACCEPTANCE[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
