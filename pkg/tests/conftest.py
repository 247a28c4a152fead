import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from cauchy_gabor.spectrum import piecewise  # noqa: E402

# fixed example sequence so recorded test runs are reproducible
settings.register_profile("repro", derandomize=True, database=None)
settings.load_profile("repro")


def random_signal(rng, lo, hi, n_pieces=None, degree=3):
    """Random piecewise-polynomial spectrum on ``[lo, hi]`` with jittered breaks."""
    n = n_pieces or int(rng.integers(2, 7))
    inner = np.sort(rng.uniform(lo, hi, n - 1))
    breaks = np.concatenate([[lo], inner, [hi]])
    keep = np.concatenate([[True], np.diff(breaks) > 1e-3])
    breaks = breaks[keep]
    coeffs = [
        rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
        for _ in range(len(breaks) - 1)
    ]
    return piecewise(breaks, coeffs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k])
