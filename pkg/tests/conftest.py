import math
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ftlsim import ApparatusGeometry, CycleSchedule, PhysicsHypothesis

SQRT5 = math.sqrt(5.0)


@pytest.fixture
def ref_geometry():
    """s = 2i; r chosen so r/V is tens of milliseconds."""
    return ApparatusGeometry(leg_s=0.02, leg_i=0.01, pump_arm_r=0.05, raise_time_T=0.001)


@pytest.fixture
def schedule():
    return CycleSchedule(
        action_a=0.01,
        standby_schedule=(0.1, 0.25, 0.5, 1.0),
        probe_speeds=(0.5, 1.0, 2.0, SQRT5),
    )


@pytest.fixture
def null_hypothesis():
    return PhysicsHypothesis.null(100.0)


@pytest.fixture
def signaling_hypothesis():
    return PhysicsHypothesis.signaling(SQRT5, dark_rate=10.0, bright_rate=1000.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
