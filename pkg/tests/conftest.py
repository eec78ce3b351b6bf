import numpy as np
import pytest

import loopsoup as ls


@pytest.fixture
def p2():
    return ls.load_energy_form(ls.fixture("p2"))


@pytest.fixture
def v1():
    return ls.load_energy_form(ls.fixture("v1"))


@pytest.fixture
def k4c1():
    return ls.load_energy_form(ls.fixture("k4c1"))


@pytest.fixture
def k4_rooted():
    return ls.load_energy_form(ls.fixture("k4_rooted"))


@pytest.fixture
def cube():
    return ls.load_energy_form(ls.fixture("cube"))


@pytest.fixture
def k3():
    return ls.load_energy_form(ls.fixture("k3_wreath"))


def random_energy_form(rng, n=4, transient=True):
    """Random connected weighted graph for property tests."""
    while True:
        C = np.triu(rng.uniform(0.2, 2.0, size=(n, n)) * (rng.random((n, n)) < 0.7), 1)
        C = C + C.T
        kappa = rng.uniform(0.1, 1.0, size=n) if transient else np.zeros(n)
        try:
            return ls.EnergyForm([f"v{i}" for i in range(n)], C, kappa)
        except ls.GraphError:
            continue
