import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from cohtest import rng as crng
from cohtest.coherence import coherence_values
from cohtest.exceptions import BadIndex, BadLag, ShapeMismatch
from cohtest.surrogate import (
    BLOCK,
    SurrogateConfig,
    circ_shift,
    empirical_pvalue,
    null_distribution,
    phase_randomize,
    surrogate_pvalue,
    surrogate_pvalues,
    surrogate_spectrum,
)

from .conftest import complex_normal, make_rep

METHODS = ["circular_shift", "phase_randomize"]


class TestConfig:
    def test_defaults(self):
        c = SurrogateConfig()
        assert c.n_perm == 2000 and c.floor == pytest.approx(1 / 2001)

    @pytest.mark.parametrize("kw", [{"n_perm": 0}, {"method": "shuffle"}, {"seed": -1}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SurrogateConfig(**kw)


class TestCircShift:
    def test_lag_zero(self):
        x = make_rep(complex_normal(np.random.default_rng(0), 6, 2))
        assert np.array_equal(circ_shift(x, 0).coeffs, x.coeffs)

    def test_definition(self):
        x = make_rep([1, 2, 3])
        assert np.array_equal(circ_shift(x, 1).coeffs[:, 0], [2, 3, 1])

    @pytest.mark.parametrize("lag", [3, -1, 1.5, True])
    def test_bad_lag(self, lag):
        with pytest.raises(BadLag):
            circ_shift(make_rep([1, 2, 3]), lag)

    def test_magnitudes_preserved(self):
        x = make_rep(complex_normal(np.random.default_rng(1), 9, 3))
        s = circ_shift(x, 4)
        assert np.array_equal(np.sort(np.abs(s.coeffs), 0), np.sort(np.abs(x.coeffs), 0))


class TestPhaseRandomize:
    def test_zero(self):
        z = make_rep(np.zeros((4, 2)))
        assert np.all(phase_randomize(z, np.random.default_rng(0)).coeffs == 0)

    def test_modulus(self):
        x = make_rep(complex_normal(np.random.default_rng(2), 30, 4))
        s = phase_randomize(x, np.random.default_rng(1))
        assert np.allclose(np.abs(s.coeffs), np.abs(x.coeffs), rtol=1e-12, atol=0)
        assert not np.allclose(s.coeffs, x.coeffs)

    def test_same_seed(self):
        x = make_rep(complex_normal(np.random.default_rng(3), 30, 4))
        a = phase_randomize(x, crng.substream(9, 1))
        b = phase_randomize(x, crng.substream(9, 1))
        assert np.array_equal(a.coeffs, b.coeffs)


class TestPvalue:
    def test_formula(self):
        null = np.array([0.1, 0.2, 0.3, 0.4])
        assert empirical_pvalue(0.5, null) == 1 / 5
        assert empirical_pvalue(0.05, null) == 1.0
        assert empirical_pvalue(0.3, null) == 3 / 5  # ties count against
        assert empirical_pvalue(0.5, null, plus_one=False) == 0.0
        assert empirical_pvalue(0.25, null, plus_one=False) == 0.5

    def test_floor_when_observed_beats_all(self):
        x = make_rep(complex_normal(np.random.default_rng(4), 148, 1))
        r = surrogate_pvalue(x, x, 0, SurrogateConfig("phase_randomize", 2000, 1))
        assert r.p_value == pytest.approx(1 / 2001)
        assert r.p_value == r.floor
        assert r.null_samples.shape == (2000,)
        assert np.all((r.null_samples >= 0) & (r.null_samples <= 1))

    def test_one_when_observed_is_below_all(self):
        # y orthogonal to x: C_obs = 0, every surrogate is >= 0
        x = make_rep([1, 1j, 1, 1j])
        y = make_rep([1, -1j, 1, -1j])
        for m in METHODS:
            assert surrogate_pvalue(x, y, 0, SurrogateConfig(m, 50, 0)).p_value == 1.0

    def test_observed_is_coherence(self):
        g = np.random.default_rng(5)
        x, y = make_rep(complex_normal(g, 40, 2)), make_rep(complex_normal(g, 40, 2))
        r = surrogate_pvalue(x, y, 1, SurrogateConfig(n_perm=10))
        assert r.observed == pytest.approx(coherence_values(x.coeffs[:, 1], y.coeffs[:, 1]))

    def test_errors(self):
        x = make_rep(np.ones((5, 2)))
        with pytest.raises(ShapeMismatch):
            surrogate_pvalue(x, make_rep(np.ones((6, 2))), 0, SurrogateConfig(n_perm=5))
        with pytest.raises(BadIndex):
            surrogate_pvalue(x, x, 2, SurrogateConfig(n_perm=5))

    @pytest.mark.parametrize("method", METHODS)
    def test_null_false_positive_rate(self, method):
        g = np.random.default_rng(6)
        x = make_rep(complex_normal(g, 148, 1))
        cfg = SurrogateConfig(method, 199, 11)
        p = np.array(
            [surrogate_pvalue(x, x.with_coeffs(complex_normal(g, 148, 1)), 0, cfg, i).p_value
             for i in range(1000)]
        )
        assert 0.03 <= np.mean(p < 0.05) <= 0.07

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 60), st.integers(0, 2**32), st.sampled_from(METHODS))
    def test_pvalue_on_grid(self, n_perm, seed, method):
        g = np.random.default_rng(seed)
        x, y = make_rep(complex_normal(g, 12, 1)), make_rep(complex_normal(g, 12, 1))
        r = surrogate_pvalue(x, y, 0, SurrogateConfig(method, n_perm, seed))
        k = r.p_value * (n_perm + 1)
        assert k == pytest.approx(round(k), abs=1e-9)
        assert 1 <= round(k) <= n_perm + 1
        assert r.floor <= r.p_value <= 1


class TestNullDistribution:
    def test_blocks_independent_of_length(self):
        g = np.random.default_rng(7)
        x, y = complex_normal(g, 50, 1)[:, 0], complex_normal(g, 50, 1)[:, 0]
        for m in METHODS:
            short = null_distribution(x, y, m, BLOCK + 3, 5)
            long = null_distribution(x, y, m, 2 * BLOCK + 7, 5)
            assert np.array_equal(short, long[: BLOCK + 3])

    def test_circ_surrogates_are_rotations(self):
        g = np.random.default_rng(8)
        x, y = complex_normal(g, 20, 1)[:, 0], complex_normal(g, 20, 1)[:, 0]
        null = null_distribution(x, y, "circular_shift", 300, 1)
        every_lag = coherence_values(
            np.stack([np.roll(x, -k) for k in range(20)]), y[None, :], axis=1
        )
        assert np.all(np.isin(null, every_lag))

    def test_tone_circ_matches_global_rotation(self):
        # a cyclic tone: every lag is a constant phase rotation of the band
        t = 148
        x = np.exp(2j * np.pi * 7 * np.arange(t) / t)
        y = complex_normal(np.random.default_rng(9), t, 1)[:, 0]
        circ = null_distribution(x, y, "circular_shift", 2000, 3)
        theta = crng.substream(3, 99).uniform(0, 2 * np.pi, 2000)
        rot = coherence_values(np.exp(1j * theta)[:, None] * x[None, :], y[None, :], axis=1)
        # both collapse onto C_obs; compare at 12 digits to ignore rounding
        assert np.ptp(circ) < 1e-12
        assert stats.ks_2samp(np.round(circ, 12), np.round(rot, 12)).pvalue > 0.01


class TestSpectrum:
    def test_self_phase_hits_floor(self):
        x = make_rep(complex_normal(np.random.default_rng(10), 148, 6))
        cfg = SurrogateConfig("phase_randomize", 2000, 2)
        assert np.all(surrogate_pvalues(x, x, cfg) == cfg.floor)

    def test_self_circ_limited_by_lag_zero(self):
        # lag 0 reproduces C_obs exactly, so circ p-values sit a little above
        # the floor (about 1 + n_perm / T counts)
        x = make_rep(complex_normal(np.random.default_rng(11), 148, 6))
        p = surrogate_pvalues(x, x, SurrogateConfig("circular_shift", 2000, 2))
        assert np.all(p > 1 / 2001) and np.all(p < 0.02)

    def test_null_band_rate(self):
        g = np.random.default_rng(12)
        x = make_rep(complex_normal(g, 148, 25))
        rates = []
        for i in range(20):
            y = x.with_coeffs(complex_normal(g, 148, 25))
            rates.append(np.mean(surrogate_pvalues(x, y, SurrogateConfig(n_perm=99, seed=i)) < 0.05))
        assert 0.02 <= np.mean(rates) <= 0.09

    def test_single_band_matches_pvalue(self):
        g = np.random.default_rng(13)
        x, y = make_rep(complex_normal(g, 30, 1)), make_rep(complex_normal(g, 30, 1))
        cfg = SurrogateConfig(n_perm=100, seed=4)
        a = surrogate_spectrum(x, y, cfg)[0]
        b = surrogate_pvalue(x, y, 0, cfg)
        assert a.p_value == b.p_value and np.array_equal(a.null_samples, b.null_samples)

    @pytest.mark.parametrize("method", METHODS)
    def test_thread_independent(self, method):
        g = np.random.default_rng(14)
        x, y = make_rep(complex_normal(g, 60, 8)), make_rep(complex_normal(g, 60, 8))
        cfg = SurrogateConfig(method, 700, 77)
        one = surrogate_spectrum(x, y, cfg, threads=1)
        four = surrogate_spectrum(x, y, cfg, threads=4)
        for a, b in zip(one, four):
            assert a.p_value == b.p_value
            assert np.array_equal(a.null_samples, b.null_samples)

    def test_band_subset_matches_full(self):
        g = np.random.default_rng(15)
        x, y = make_rep(complex_normal(g, 40, 5)), make_rep(complex_normal(g, 40, 5))
        cfg = SurrogateConfig(n_perm=60, seed=3)
        full = surrogate_pvalues(x, y, cfg)
        assert np.array_equal(surrogate_pvalues(x, y, cfg, bands=[3, 1]), full[[3, 1]])
