"""Shared fixtures.

Heavy objects (Zak grids at the default working resolution) are built once
per session through the cache inside ``zakbench.acceptance`` so the unit
tests and the acceptance battery share work.
"""

from fractions import Fraction

import pytest

from zakbench import acceptance
from zakbench.zak_core import TimeFrequencyShift


@pytest.fixture(scope="session")
def chi():
    return acceptance.chi_window()


@pytest.fixture(scope="session")
def chi_grid(chi):
    return acceptance.grid_for("chi", chi)


@pytest.fixture(scope="session")
def displayed():
    return acceptance.displayed_window()


@pytest.fixture(scope="session")
def displayed_grid(displayed):
    return acceptance.grid_for("displayed", displayed)


@pytest.fixture(scope="session")
def corrected():
    return acceptance.corrected_pair()


@pytest.fixture(scope="session")
def corrected_grid(corrected):
    return acceptance.grid_for("corrected", corrected[0])


@pytest.fixture(scope="session")
def gaussian():
    return acceptance.gaussian_window()


@pytest.fixture(scope="session")
def smooth():
    return acceptance.smooth_triple()


def half_shift() -> TimeFrequencyShift:
    return TimeFrequencyShift(Fraction(1, 2), Fraction(0))
