import numpy as np
import pytest

from pswc.grid import GridSpec
from pswc.symplectic import build_form, standard_j
from pswc.wavepacket import hermite_window, wigner_grid


@pytest.fixture(scope="session")
def grid64():
    """Desk-scale default function grid: n=1, N=64, L=6."""
    return GridSpec.regular(1, 6.0, 64)


@pytest.fixture(scope="session")
def wgrid64(grid64):
    return wigner_grid(grid64)


@pytest.fixture(scope="session")
def j_form():
    return build_form(standard_j(1))


@pytest.fixture(scope="session")
def four_j_form():
    return build_form(4.0 * standard_j(1))


@pytest.fixture(scope="session")
def window0(grid64):
    return hermite_window(grid64, 0)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def rel_field_err(a, b):
    num = np.sqrt(np.sum(np.abs(a.values - b.values) ** 2))
    den = max(np.sqrt(np.sum(np.abs(b.values) ** 2)), 1e-300)
    return float(num / den)
