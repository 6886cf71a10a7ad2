import logging

import pytest

from scholtes_ccop.model import load_builtin

ACCEPTANCE_LINES: dict = {}


@pytest.fixture(autouse=True)
def _quiet_activity_warnings(caplog):
    caplog.set_level(logging.ERROR, logger="scholtes_ccop.activesets")


@pytest.fixture
def ndt2():
    return load_builtin("ndt2").reform()


@pytest.fixture
def ndt6():
    return load_builtin("ndt6").reform()


@pytest.fixture
def persistence():
    return load_builtin("persistence").reform()


@pytest.fixture
def separable4():
    return load_builtin("separable4").reform()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
