import random

import pytest

# one "STATUS  criterion: detail" line per acceptance criterion
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def criterion():
    def record(name, ok, detail):
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append(f"{status}  {name}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
