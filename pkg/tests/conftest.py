import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from svirs import Parameters
from svirs.equilibria import basic_reproduction_number


def random_parameters(rng, endemic=True, tau_range=(0.0, 60.0)):
    """Draw an admissible parameter set; with ``endemic`` reject until R0 > 1."""
    while True:
        p = Parameters(
            pi=rng.uniform(5, 50),
            beta=10 ** rng.uniform(-4, -2.3),
            mu=rng.uniform(0.005, 0.05),
            iota=rng.uniform(0, 1),
            eta=rng.uniform(0, 0.2),
            gamma=rng.uniform(0.05, 1),
            d=rng.uniform(0, 0.2),
            sigma=rng.uniform(0, 1),
            theta_star=rng.uniform(0.05, 1),
            tau=rng.uniform(*tau_range),
        )
        if not endemic or basic_reproduction_number(p) > 1.0:
            return p


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
