import numpy as np
import pytest

from affine_tac.catalog import entry
from affine_tac.config import RunConfig, SearchConfig
from affine_tac.manifold import Atlas, Chart


def flat_patch_jet(u):
    lead = u.shape[:-1]
    point = np.concatenate([u, np.zeros(lead + (1,))], axis=-1)
    d1 = np.broadcast_to(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]), lead + (2, 3)).copy()
    d2 = np.zeros(lead + (2, 2, 3))
    return point, d1, d2


@pytest.fixture(scope="session")
def flat_patch():
    """The plane patch f(u, v) = (u, v, 0)"""
    chart = Chart(
        id="patch",
        lower=np.array([-1.0, -1.0]),
        upper=np.array([1.0, 1.0]),
        periodic=(False, False),
        jet=flat_patch_jet,
    )
    return Atlas(charts=(chart,), name="flat_patch")


@pytest.fixture(scope="session")
def sphere_entry():
    return entry("sphere_centroaffine_n2")


@pytest.fixture(scope="session")
def sphere_n3_entry():
    return entry("sphere_centroaffine_n3")


@pytest.fixture(scope="session")
def sphere_r4_entry():
    return entry("sphere_in_R4")


@pytest.fixture(scope="session")
def sigma_entry():
    return entry("sigma_kossowski")


@pytest.fixture(scope="session")
def torus_entry():
    return entry("torus_revolution")


@pytest.fixture(scope="session")
def dumbbell_entry():
    return entry("dumbbell")


@pytest.fixture(scope="session")
def search_config():
    """A coarser seed grid than the default, enough for the catalog surfaces"""
    return SearchConfig(seed_resolution=48)


@pytest.fixture()
def run_config(search_config):
    return RunConfig(sample_count=30, seed=3, sample_resolution=16, search=search_config)
