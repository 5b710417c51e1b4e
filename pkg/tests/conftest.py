import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qdc.discovery import CIOracle, ic_star
from qdc.enumeration import PAPER_CI
from qdc.qsim import CircuitParams, closed_form_state, joint_distribution

GENERIC = CircuitParams(0.5, math.pi / 6, math.pi / 3)


@pytest.fixture
def generic_params():
    return GENERIC


@pytest.fixture
def generic_dist():
    return joint_distribution(closed_form_state(GENERIC))


@pytest.fixture(scope="session")
def pattern():
    return ic_star(CIOracle.from_ciset(PAPER_CI, "ABC"), "ABC")


ACCEPTANCE_LINES = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        ACCEPTANCE_LINES[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_LINES, key=lambda n: int(n.split("_")[2])):
        terminalreporter.write_line(f"{ACCEPTANCE_LINES[name]}  {name}")
