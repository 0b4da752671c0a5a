import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from diracband import Lattice, build_clifford


@pytest.fixture(scope="session")
def lat3():
    return Lattice.cubic(3)


@pytest.fixture(scope="session")
def rep3():
    return build_clifford(3)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240814)
