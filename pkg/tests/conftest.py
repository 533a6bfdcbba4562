import numpy as np
import pytest
from hypothesis import settings

from dunkl_tl.config import RunConfig
from dunkl_tl.pipeline import Setting

settings.register_profile("default", max_examples=30, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def setting():
    return Setting(RunConfig())


@pytest.fixture(scope="session")
def setting_k0():
    """kappa = 0: classical Laplacian on the line."""
    return Setting(RunConfig(kappa=0.0))


@pytest.fixture(scope="session")
def setting_coarse():
    return Setting(RunConfig(m=256))


@pytest.fixture(scope="session")
def setting_2d():
    return Setting(RunConfig(preset="z2xz2"))


@pytest.fixture(scope="session")
def small():
    """Cheap configuration for property tests."""
    return Setting(RunConfig(m=128))


@pytest.fixture(scope="session")
def interior(setting):
    return np.flatnonzero(setting.grid.inner_half_box())
