import numpy as np
import pytest

from ve2d.dynamics import StepperConfig, evolve
from ve2d.grid import Grid
from ve2d.state import InitialDataParams, make_initial_data


@pytest.fixture(scope="session")
def grid32():
    return Grid(32, 16.0)


@pytest.fixture(scope="session")
def grid64():
    return Grid(64, 32.0)


@pytest.fixture(scope="session")
def small_state(grid64):
    return make_initial_data(grid64, InitialDataParams(amplitude=0.01, seed=1))


@pytest.fixture(scope="session")
def resolved_grid():
    """Fine enough that the initial bump (sigma = radius/6) is fully
    resolved below the dealiasing cutoff; commuted-equation residuals
    then reflect algebra, not spatial truncation."""
    return Grid(128, 32.0)


@pytest.fixture(scope="session")
def resolved_params():
    return InitialDataParams(amplitude=0.01, seed=1, support_radius=6.0)


@pytest.fixture(scope="session")
def evolved_state(resolved_grid, resolved_params):
    """A mildly evolved inviscid state with nontrivial H."""
    return evolve(make_initial_data(resolved_grid, resolved_params),
                  2.0, StepperConfig())


@pytest.fixture(scope="session")
def evolved_state_viscous(resolved_grid, resolved_params):
    from dataclasses import replace
    st = make_initial_data(resolved_grid, replace(resolved_params, mu=0.05))
    return evolve(st, 2.0, StepperConfig())
