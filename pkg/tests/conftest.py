import pytest

from app.construction.model import sample_instance
from app.construction.params import derive_params
from app.models import ExperimentConfig

SMALL = {"p": 0.2, "r": 3, "k": 6, "delta": 0.5}


@pytest.fixture
def small_params():
    return derive_params(5, 30, "operational", SMALL)


@pytest.fixture
def small_instance(small_params):
    return sample_instance(small_params, 11)


@pytest.fixture
def medium_params():
    return derive_params(5, 60, "operational", {"p": 0.1, "r": 3, "k": 12, "delta": 0.5})


@pytest.fixture
def medium_instance(medium_params):
    return sample_instance(medium_params, 5)


@pytest.fixture
def small_config(tmp_path):
    return ExperimentConfig(
        ell=5,
        n=30,
        seeds=[3],
        trials=50,
        walk_samples=3,
        search_budget=5,
        out=str(tmp_path),
        **SMALL,
    )
