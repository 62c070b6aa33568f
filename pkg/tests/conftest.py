import os

os.environ.setdefault("LATTICE_DP_ENV", "testing")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from lattice_dp import create_app  # noqa: E402
from lattice_dp.models import LatticeOperator, LatticeSpace  # noqa: E402


@pytest.fixture(scope="session", autouse=True)
def testing_config():
    return create_app("testing")


@pytest.fixture
def identity3():
    space = LatticeSpace.lp(3, 1)
    return LatticeOperator(space, space, np.eye(3))


@pytest.fixture
def equal_columns():
    """Both atoms map to the same vector: maximally far from disjointness preserving."""
    return LatticeOperator(LatticeSpace.lp(2, 1), LatticeSpace.lp(2, 1), [[1.0, 1.0], [0.0, 0.0]])


@pytest.fixture
def graph2():
    from lattice_dp.services import InstanceService
    return InstanceService.graph_operator(2, 1, 2)


def random_positive(rng, n, m, domain=None, codomain=None):
    return LatticeOperator(domain or LatticeSpace.lp(n, 1), codomain or LatticeSpace.lp(m, 1), rng.random((m, n)))
