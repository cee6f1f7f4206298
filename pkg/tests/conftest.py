import pytest

from logspectra.config import get_settings
from logspectra.fem import mesh_interval
from logspectra.testlab import make_bump


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    monkeypatch.delenv("S_GRID", raising=False)
    monkeypatch.delenv("D_BOUND_GRID", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def smooth_bump():
    return make_bump("smooth-bump", 0.0, 1.0)


@pytest.fixture
def poly_bump():
    return make_bump("polynomial-C2-bump", 0.1, 0.8)


@pytest.fixture
def unit_mesh():
    return mesh_interval(-1.0, 1.0, 32)
