import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from groupdrift import Sample  # noqa: E402

XYZ = ["x", "y", "z"]

# rows of the joint-drift illustration: same marginals, different joint law
JOINT_REFERENCE = [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [3.0, 3.0, 3.0]]
JOINT_TARGET = [[3.0, 1.0, 2.0], [1.0, 2.0, 3.0], [2.0, 3.0, 1.0]]

# benchmark functions with explicand [1,2,3] and baseline [0,0,0]:
# (expression, evd, w1, shapley, w1 shapley, ig, w1 ig)
BENCHMARKS = {
    "xy": ("x*y", 2.0, 2.0, [1, 1, 0], [1, 1, 0], [1, 1, 0], [1, 1, 0]),
    "x-y": ("x - y", -1.0, 1.0, [1, -2, 0], [0, 1, 0], [1, -2, 0], [-1, 2, 0]),
    "x+y-z": ("x + y - z", 0.0, 0.0, [1, 2, -3], [0, 0, 0], [1, 2, -3], [0, 0, 0]),
    "xy-z^2": ("x*y - z^2", -7.0, 7.0, [1, 1, -9], [-1 / 3, -1 / 3, 23 / 3], [1, 1, -9],
               [-1, -1, 9]),
    "min": ("min(x, y)", 1.0, 1.0, [0.5, 0.5, 0], [0.5, 0.5, 0], [1, 0, 0], [1, 0, 0]),
    "abs": ("abs(x - y)", 1.0, 1.0, [0, 1, 0], [0, 1, 0], [-1, 2, 0], [-1, 2, 0]),
}


@pytest.fixture
def explicand_123():
    return Sample(np.array([[1.0, 2.0, 3.0]]), XYZ)


@pytest.fixture
def baseline_000():
    return Sample(np.zeros((1, 3)), XYZ)


@pytest.fixture
def joint_pair():
    return Sample(np.array(JOINT_REFERENCE), XYZ), Sample(np.array(JOINT_TARGET), XYZ)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines):
        terminalreporter.write_line(line[1])
