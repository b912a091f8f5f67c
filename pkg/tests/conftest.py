import time

import pytest

from voi.cases import gshp

ACCEPTANCE_LINES = []
TIMINGS = {}


@pytest.fixture(scope="session")
def gshp_load():
    return gshp.default_load()


@pytest.fixture(scope="session")
def gshp_surface(gshp_load):
    started = time.perf_counter()
    surface = gshp.build_cost_surface(gshp.GshpParams(), gshp_load)
    TIMINGS["gshp_surface"] = time.perf_counter() - started
    return surface


@pytest.fixture(scope="session")
def gshp_problem(gshp_surface):
    return gshp.build_gshp_problem(gshp.GshpParams(), surface=gshp_surface)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
