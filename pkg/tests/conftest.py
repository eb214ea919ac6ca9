import json
from pathlib import Path

import mpmath
import pytest

from qzeros import PrecisionContext

ORACLE_FILE = Path(__file__).parent / "oracles" / "values.json"


@pytest.fixture(scope="session")
def oracle():
    """Reference values produced by ``tests/oracles/generate.py`` (no package code)."""
    return json.loads(ORACLE_FILE.read_text())


@pytest.fixture
def ctx():
    return PrecisionContext(256)


@pytest.fixture(autouse=True)
def _restore_mp_precision():
    prec = mpmath.mp.prec
    yield
    mpmath.mp.prec = prec


# acceptance criteria report: each acceptance test appends one line here
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
