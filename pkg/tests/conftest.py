import numpy as np
import pytest

from core.states import ket_to_density, minus_ket, plus_ket
from engine.model import ModelParams, TimeGrid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def plus_state():
    return ket_to_density(plus_ket())


@pytest.fixture
def minus_state():
    return ket_to_density(minus_ket())


@pytest.fixture
def nmr_params():
    """Parameters of the extended-LG experiment: J = 30 Hz, theta = pi/18, gamma = 6.667/s."""
    return ModelParams(J=30.0, theta=np.pi / 18, gamma=6.667)


@pytest.fixture
def pure_params():
    return ModelParams(J=30.0, theta=0.3)


@pytest.fixture
def fine_grid():
    return TimeGrid.span(0.02, 1e-5)


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv('QML_OUT_DIR', str(tmp_path))
    return tmp_path
