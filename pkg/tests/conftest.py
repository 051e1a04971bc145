import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from msetcond import builtin_class, estimate_rho, exact_table  # noqa: E402

ACCEPTANCE: dict = {}


def record(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def free_trees():
    return builtin_class("free_trees", 2000)


@pytest.fixture(scope="session")
def rho_free(free_trees):
    return estimate_rho(free_trees, 200, "extrapolated").rho


@pytest.fixture(scope="session")
def free_table_400(free_trees):
    return exact_table(free_trees, 400, 120)


@pytest.fixture(scope="session")
def synthetic_real():
    return builtin_class("synthetic", 600, {"alpha": 2.5, "rho0": 0.3})


@pytest.fixture(scope="session")
def synthetic_int():
    return builtin_class("synthetic", 400, {"alpha": 2.5, "rho0": 0.5, "integer": True})
