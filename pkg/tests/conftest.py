import functools
import time

import pytest

from gpelab.core import DEFAULT_GRID, Grid1D
from gpelab.pipeline import amplitude_variant, preset, run_experiment, wavenumber_variant


@pytest.fixture(scope="session")
def grid():
    return DEFAULT_GRID


@pytest.fixture(scope="session")
def small_grid():
    return Grid1D(-20.0, 20.0, 256)


# wall time of the first (uncached) run of each variant
RUN_SECONDS = {}
# (criterion, passed, detail) lines collected by the acceptance gate
GATE = []


@functools.lru_cache(maxsize=None)
def _run(name, factor=None, k=None):
    plan = preset(name)
    if k is not None:
        plan = wavenumber_variant(plan, k)
    if factor is not None:
        plan = amplitude_variant(plan, factor)
    start = time.perf_counter()
    traj = run_experiment(plan)
    RUN_SECONDS[(name, factor, k)] = time.perf_counter() - start
    return traj


@pytest.fixture(scope="session")
def run_preset():
    """Run (and memoise for the session) a preset, optionally varied."""
    return _run


def pytest_terminal_summary(terminalreporter):
    if not GATE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(GATE, key=lambda g: g[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {crit:>2}  {detail}")
