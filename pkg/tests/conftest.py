import numpy as np
import pytest

import heisadams as ha


@pytest.fixture(scope="session")
def constants():
    return ha.compute_constants()


@pytest.fixture(scope="session")
def ball33():
    return ha.ball_grid(33)


@pytest.fixture(scope="session")
def box9():
    return ha.box_grid(9)


def random_free_field(dom, rng, scale=1.0):
    free = dom.free_mask()
    v = np.zeros(dom.shape)
    v[free] = scale * rng.standard_normal(int(free.sum()))
    return ha.GridField(dom, v)
