import logging

import numpy as np
import pytest
from dotenv import load_dotenv

from ernst_theta.config import settings
from ernst_theta.solution.ernst import ErnstSolution, admissible_characteristics, default_probe
from ernst_theta.surface.curve import new_ernst_curve, new_general_curve
from ernst_theta.surface.periods import compute_periods
from ernst_theta.theta.characteristics import Characteristics

load_dotenv()

GENUS1_BRANCH = [-2.0, -1.0, 1.0, 2.0]
GENUS2_BRANCH = [-3.0, -2.0, -0.5, 0.5, 2.0, 3.0]
ERNST_PAIRS = [(-1.0 + 0.5j, -1.0 - 0.5j)]
ERNST_PAIRS_G2 = [(-1.0 + 0.5j, -1.0 - 0.5j), (-3.0, -2.0)]


@pytest.fixture(scope="session", autouse=True)
def quiet_logging():
    """
    Enterprise Fixture for a silent test run.
    Library loggers only report warnings; nothing is written to the log file.
    """
    logging.getLogger("ernst_theta").setLevel(logging.WARNING)
    yield


@pytest.fixture
def settings_override():
    """
    Enterprise Fixture for temporary settings changes.
    Every field touched through the returned setter is restored after the test.
    """
    saved = {}

    def apply(**values):
        for name, value in values.items():
            saved.setdefault(name, getattr(settings, name))
            setattr(settings, name, value)

    yield apply
    for name, value in saved.items():
        setattr(settings, name, value)


@pytest.fixture
def rng():
    """Enterprise Fixture for a seeded generator."""
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def genus1_curve():
    """Enterprise Fixture for the real genus-1 curve with branch points ±1, ±2."""
    return new_general_curve(GENUS1_BRANCH)


@pytest.fixture(scope="session")
def genus1_periods(genus1_curve):
    return compute_periods(genus1_curve)


@pytest.fixture(scope="session")
def genus2_curve():
    """Enterprise Fixture for a real genus-2 curve."""
    return new_general_curve(GENUS2_BRANCH)


@pytest.fixture(scope="session")
def genus2_periods(genus2_curve):
    return compute_periods(genus2_curve)


@pytest.fixture(scope="session")
def probe_xi():
    return default_probe(ERNST_PAIRS)


@pytest.fixture(scope="session")
def ernst_curve(probe_xi):
    """Enterprise Fixture for the genus-1 Ernst curve at the probe point."""
    return new_ernst_curve(probe_xi, ERNST_PAIRS)


@pytest.fixture(scope="session")
def ernst_solution(ernst_curve, probe_xi):
    """
    Enterprise Fixture for an admissible genus-1 solution.
    p = 0 and q = −h/4 + 0.1i, so 2 Re q + h/2 = 0 and the reality condition holds.
    """
    chars = admissible_characteristics(ernst_curve, [0.1])
    return ErnstSolution(ERNST_PAIRS, chars, probe_xi=probe_xi)


@pytest.fixture(scope="session")
def flat_solution(probe_xi):
    """Enterprise Fixture for the flat solution p = q = 0."""
    return ErnstSolution(ERNST_PAIRS, Characteristics.zero(1), probe_xi=probe_xi)


@pytest.fixture(scope="session")
def ernst_solution_g2():
    """Enterprise Fixture for an admissible genus-2 solution."""
    probe = default_probe(ERNST_PAIRS_G2)
    chars = admissible_characteristics(new_ernst_curve(probe, ERNST_PAIRS_G2), [0.1, -0.2])
    return ErnstSolution(ERNST_PAIRS_G2, chars, probe_xi=probe)
