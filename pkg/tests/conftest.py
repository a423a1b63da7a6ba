import sys

import numpy as np
import pytest

from risdof.channel import sample_channel
from risdof.numerics import Rng


@pytest.fixture
def rng():
    return Rng(1234)


def random_instance(rng, m, n, k, direct=False, p=1.0):
    return sample_channel(rng, m, n, k, direct, p)


def random_cvec(rng, n, scale=1.0):
    z = rng.gen.standard_normal((n, 2))
    return scale * (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS, key=str):
        terminalreporter.write_line(mod.RESULTS[key])
