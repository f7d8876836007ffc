import numpy as np
import pytest

import helpers


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


def pytest_terminal_summary(terminalreporter):
    if not helpers.ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(helpers.ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
