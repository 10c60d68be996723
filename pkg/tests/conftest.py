import json
import sys
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FROZEN = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


@pytest.fixture(scope="session")
def frozen():
    return FROZEN


def unit_complex(n):
    """Hypothesis strategy: a normalised complex vector of length n."""
    comp = st.floats(-1, 1, allow_nan=False, allow_infinity=False)
    return (st.lists(st.tuples(comp, comp), min_size=n, max_size=n)
            .map(lambda v: np.array([a + 1j * b for a, b in v]))
            .filter(lambda v: np.linalg.norm(v) > 1e-3)
            .map(lambda v: v / np.linalg.norm(v)))


angles_st = st.tuples(st.floats(0, math.pi), st.floats(0, 2 * math.pi - 1e-9))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod and getattr(mod, "RESULTS", None):
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
