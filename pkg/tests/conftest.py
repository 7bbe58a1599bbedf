import numpy as np
import pytest

from dtc2d import (
    FloquetParams,
    build_cycle,
    build_lattice,
    neel_state,
    sample_disorder,
    unroll,
)


@pytest.fixture(scope="session")
def hexagon():
    return build_lattice(1, 1)


@pytest.fixture(scope="session")
def hexagon_order(hexagon):
    return unroll(hexagon)


@pytest.fixture(scope="session")
def lattice_2x2():
    return build_lattice(2, 2)


@pytest.fixture(scope="session")
def dtc_cycle(hexagon):
    """Floquet cycle at the time-crystal point, fixed disorder seed."""
    disorder = sample_disorder(hexagon, seed=7)
    params = FloquetParams(epsilon=0.05, phi=0.45 * np.pi)
    return build_cycle(hexagon, disorder, params)


@pytest.fixture(scope="session")
def hexagon_neel(hexagon):
    return neel_state(hexagon)
