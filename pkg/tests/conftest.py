from __future__ import annotations

import pytest

from gl2lfun import forms


@pytest.fixture(scope="session")
def delta20k():
    return forms.delta(20000)


@pytest.fixture(scope="session")
def delta60k():
    return forms.delta(60000)


@pytest.fixture(scope="session")
def delta100k():
    return forms.delta(100000)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
