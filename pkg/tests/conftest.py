import numpy as np
import pytest

from sparseinterp import FilterHKnobs, build_filter_g, build_filter_h


@pytest.fixture(scope="session")
def h_k1():
    return build_filter_h(1, 0.2, 1.0, FilterHKnobs(c_r=1.0))


@pytest.fixture(scope="session")
def h_k2():
    return build_filter_h(2, 0.1, 1.0)


@pytest.fixture(scope="session")
def g_small():
    return build_filter_g(k=1, B=8, delta=1e-6, alpha_g=0.2)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
