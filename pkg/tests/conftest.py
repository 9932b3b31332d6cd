import sys

import numpy as np
import pytest

from splitac.grid import Grid, NEUMANN, PERIODIC, SPECTRAL, FIVE_POINT

BOUNDARIES = (NEUMANN, PERIODIC)
SYMBOLS = (FIVE_POINT, SPECTRAL)


@pytest.fixture(params=BOUNDARIES)
def boundary(request):
    return request.param


@pytest.fixture(params=[(b, s) for b in BOUNDARIES for s in SYMBOLS], ids=lambda p: "-".join(p))
def any_grid(request):
    b, s = request.param
    return Grid(16, 12, b, s)


def random_field(grid, seed, amplitude=1.0):
    gen = np.random.default_rng(seed)
    return amplitude * (2.0 * gen.random(grid.shape) - 1.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    report = getattr(mod, "REPORT", None)
    if not report:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(report):
        terminalreporter.write_line(report[key])
