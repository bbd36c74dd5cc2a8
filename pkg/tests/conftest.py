import numpy as np
import pytest

import convexgauss as cg

G1_AT_1 = 0.24197072451914337  # standard normal density at 1
HALF_PERIM = 0.3032653298563167  # e^{-1/2}/2, one graph of the unit disk
DISK_PERIM = 0.6065306597126334  # e^{-1/2}
INV_SQRT_2PI = 0.3989422804014327


@pytest.fixture(scope="session")
def disk():
    return cg.ball(1.0, 2)


@pytest.fixture(scope="session")
def ball3():
    return cg.ball(1.5, 3)


@pytest.fixture(scope="session")
def halfspace3():
    return cg.halfspace([1.0, 0.0, 0.0], 1.0)


@pytest.fixture(scope="session")
def slab2():
    return cg.slab([1.0, 0.0], 1.0)


@pytest.fixture(scope="session")
def cyl3():
    return cg.cylinder(cg.ball(1.0, 2), [0.0, 0.0, 1.0])


def e(i, n):
    v = np.zeros(n)
    v[i] = 1.0
    return v
