from pathlib import Path

import pytest

from revnets.io import load_net

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"
REFERENCE_FIXTURES = ["figure1", "figure2", "figure3a", "figure3b", "figure3c", "figure4"]
CYCLIC_FIXTURES = ["figure3a", "figure3b", "figure3c", "figure4"]

ACCEPTANCE_LINES: list[str] = []


def load(name):
    return load_net(FIXTURE_DIR / f"{name}.rpn.json").net


@pytest.fixture
def net():
    return load


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
