import time

import numpy as np
import pytest

from fourier_l1.grid import CoefficientGrid

# acceptance outcomes, filled by tests/test_acceptance.py and printed at the end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
_SESSION_START = time.perf_counter()
SUITE_BUDGET_SECONDS = 600


def random_grid(rng: np.random.Generator, bound_j: int, bound_k: int) -> CoefficientGrid:
    shape = (2 * bound_j + 1, 2 * bound_k + 1)
    return CoefficientGrid(rng.normal(size=shape) + 1j * rng.normal(size=shape))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - _SESSION_START
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    budget_ok = elapsed <= SUITE_BUDGET_SECONDS
    terminalreporter.write_line(f"{'PASS' if budget_ok else 'FAIL'} criterion 8 (suite runtime): "
                                f"{elapsed:.1f} s against {SUITE_BUDGET_SECONDS} s")
