import numpy as np
import pytest
from sklearn.base import clone

from cohtest import GLMCoherenceTest, SurrogateCoherenceTest
from cohtest.decompose import BandParams, Signal, decompose
from cohtest.glm import glm_spectrum
from cohtest.surrogate import SurrogateConfig, surrogate_pvalues

FS = 10.0


@pytest.fixture(scope="module")
def xy():
    g = np.random.default_rng(4)
    x = g.standard_normal(2000)
    y = 0.3 * x + g.standard_normal(2000)
    return x, y


def test_get_set_params():
    est = GLMCoherenceTest(fs_hz=FS, bandwidth_hz=0.1)
    p = est.get_params()
    assert p["fs_hz"] == FS and p["bandwidth_hz"] == 0.1 and p["rolloff"] == 1.0
    est.set_params(upsample_fx=2)
    assert clone(est).get_params()["upsample_fx"] == 2
    s = SurrogateCoherenceTest(method="circular_shift", n_perm=30)
    assert s.get_params()["method"] == "circular_shift"


def test_glm_matches_functional(xy):
    x, y = xy
    est = GLMCoherenceTest(fs_hz=FS).fit(x, y)
    ax, ay = decompose(Signal(x, FS), BandParams()), decompose(Signal(y, FS), BandParams())
    ref = glm_spectrum(ax, ay)
    assert np.array_equal(est.p_values_, ref.p_value)
    assert np.array_equal(est.deviance_, ref.deviance)
    assert np.array_equal(est.band_centers_hz_, ax.band_centers_hz)
    assert est.coherence_.shape == est.p_values_.shape
    assert np.all(est.significant(0.05)[1:])


def test_surrogate_matches_functional(xy):
    x, y = xy
    est = SurrogateCoherenceTest(n_perm=40, seed=2, fs_hz=FS).fit(x, y)
    ax, ay = decompose(Signal(x, FS), BandParams()), decompose(Signal(y, FS), BandParams())
    ref = surrogate_pvalues(ax, ay, SurrogateConfig("phase_randomize", 40, 2))
    assert np.array_equal(est.p_values_, ref)
    assert est.p_floor_ == 1 / 41
    assert np.all(est.p_values_ >= est.p_floor_)


def test_length_mismatch():
    with pytest.raises(ValueError):
        GLMCoherenceTest(fs_hz=FS).fit(np.zeros(100), np.zeros(101))
