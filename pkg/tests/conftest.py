import random

import pytest

from escdim.census import find_poles
from escdim.nevanlinna import spec_airy, spec_tan, spec_weber


@pytest.fixture
def rng():
    return random.Random(20240817)


# censuses are immutable and cost seconds to build; shared across files
@pytest.fixture(scope="session")
def tan20():
    return find_poles(spec_tan(), 20.0)


@pytest.fixture(scope="session")
def tan50():
    return find_poles(spec_tan(), 50.0)


@pytest.fixture(scope="session")
def airy26():
    return find_poles(spec_airy(), 26.0)


@pytest.fixture(scope="session")
def weber12():
    return find_poles(spec_weber(), 12.0)
