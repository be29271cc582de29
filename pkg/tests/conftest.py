import numpy as np
import pytest

from beliefape.lifecycle import GridSpec, LifecycleModel
from beliefape.synthetic import synthetic_panel

SMALL_GRID = GridSpec(n_assets=40, n_beliefs=15, n_pension=5, n_quad=5, n_retire=80)


@pytest.fixture(scope="session")
def small_model():
    return LifecycleModel(grid=SMALL_GRID)


@pytest.fixture(scope="session")
def synth():
    return synthetic_panel(300, 3, seed=11)


@pytest.fixture(scope="session")
def panel(synth):
    return synth.panel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, ok, detail)``."""
    def record(n, ok, detail):
        _ACCEPTANCE[n] = (bool(ok), detail)
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}: {detail}")
