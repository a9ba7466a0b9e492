import numpy as np
import pytest

from capstokes.grid import Grid, GridFn
from capstokes.evolution import InterfaceState


@pytest.fixture(scope="session")
def periodic_grid():
    return Grid.centered(2 * np.pi, 128, "periodic")


@pytest.fixture(scope="session")
def bump_state():
    """Gaussian bump of height 0.3 on a long line grid, used by the field tests."""
    g = Grid.centered(40.0, 3201, "line")
    return InterfaceState(GridFn.from_function(g, lambda x: 0.3 * np.exp(-x**2)))


@pytest.fixture(scope="session")
def small_bump():
    g = Grid.centered(30.0, 1024, "line")
    return InterfaceState(GridFn.from_function(g, lambda x: 0.5 * np.exp(-x**2)))
