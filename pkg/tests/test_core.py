import numpy as np

from app.core import ConvergenceError, InstanceFormatError, settings, stage_rng, stage_seed
from app.core.seeding import as_rng


def test_stage_seed_is_stable_and_stage_specific():
    assert stage_seed(7, "partition.red") == stage_seed(7, "partition.red")
    assert stage_seed(7, "partition.red") != stage_seed(7, "partition.blue")
    assert stage_seed(7, "walks") != stage_seed(8, "walks")
    assert 0 <= stage_seed(-1, "x") < 2 ** 64


def test_stage_rng_replays():
    a = stage_rng(3, "search").random(5)
    b = stage_rng(3, "search").random(5)
    assert np.array_equal(a, b)


def test_as_rng_passes_generators_through():
    rng = np.random.default_rng(1)
    assert as_rng(rng) is rng
    assert as_rng(4).random() == np.random.default_rng(4).random()


def test_error_messages():
    assert "line 3" in str(InstanceFormatError("bad", 3))
    assert "after 10 iterations" in str(ConvergenceError(10, 0.5))


def test_settings_defaults():
    assert settings.SPECTRAL_TOL > 0
    assert settings.ALPHA_EXACT_CAP >= 1
