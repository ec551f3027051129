import json
from pathlib import Path

import pytest

from rosenmorse.model import PotentialParams

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def cval(pair):
    return complex(float(pair[0]), float(pair[1]))


@pytest.fixture(scope="session")
def oracle():
    return json.loads((FIXTURES / "oracle.json").read_text())


@pytest.fixture(scope="session")
def barrier():
    return PotentialParams(U0=2.0)


@pytest.fixture(scope="session")
def well():
    return PotentialParams(U0=-2.0)


@pytest.fixture(scope="session")
def free():
    return PotentialParams(U0=0.0)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
