import numpy as np
import pytest

from dimcut.tabular import Dataset, ProblemType

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE.append((name, passed, detail))
    print(f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def tiny_regression():
    X = np.array([[0.0, 1.0], [1.0, 0.5], [2.0, 2.5], [3.0, 1.5]])
    return Dataset(("a", "b"), X, np.array([0.1, 1.2, 1.9, 3.3]), ProblemType.REGRESSION)
