import numpy as np
import pytest

from qmetropolis import MetropolisConfig, PEModel, build_heisenberg_pair, local_pauli_update_set, rescale_for_pe


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def h2():
    return build_heisenberg_pair().eigensystem()


@pytest.fixture(scope="session")
def h2_exact(h2):
    return PEModel("exact", rescale_for_pe(h2, 1, mode="exact"))


@pytest.fixture
def h2_config(h2_exact):
    def make(beta, **kw):
        return MetropolisConfig(beta, h2_exact, local_pauli_update_set(2), **kw)

    return make
