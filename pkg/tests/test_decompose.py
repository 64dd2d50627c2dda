import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohtest.coherence import coherence
from cohtest.decompose import (
    BandParams,
    BandRep,
    BandTransformer,
    Signal,
    band_power,
    band_powers,
    decompose,
    peak_frequency,
    taper_weights,
)
from cohtest.exceptions import BadIndex, InvalidBandRange, NoPeak, SignalTooShort

from .conftest import FS, make_rep


def tone(freq, duration=367.0, fs=FS, amp=1.0, phase=0.0):
    t = np.arange(int(round(duration * fs))) / fs
    return Signal(amp * np.cos(2 * np.pi * freq * t + phase), fs)


class TestParams:
    def test_defaults(self):
        p = BandParams()
        assert p.bandwidth_hz == 0.2 and p.range_hz == (0.0, 1.2) and p.upsample_fx == 3
        assert p.spacing == pytest.approx(0.05)

    def test_centers_include_endpoints(self):
        c = BandParams().nominal_centers()
        assert c[0] == 0.0 and c[-1] == pytest.approx(1.2) and c.size == 25

    @pytest.mark.parametrize("rng", [(1.0, 1.0), (1.0, 0.5), (-0.1, 1.0)])
    def test_degenerate_range(self, rng):
        with pytest.raises(InvalidBandRange):
            BandParams(range_hz=rng)

    @pytest.mark.parametrize(
        "kw", [{"bandwidth_hz": 0}, {"upsample_fx": 0}, {"taper": "hann"}, {"rolloff": 0}]
    )
    def test_bad_values(self, kw):
        with pytest.raises(ValueError):
            BandParams(**kw)


class TestDecompose:
    def test_default_shape(self, white_rep):
        # about 2 * B * duration rows and at least 25 bands
        assert white_rep.n_times == 146
        assert white_rep.n_bands == 25
        assert white_rep.dt_s == pytest.approx(367.0 / 146)
        assert np.all(np.diff(white_rep.band_centers_hz) > 0)

    def test_zero_signal(self):
        rep = decompose(Signal(np.zeros(5000), FS), BandParams())
        assert np.all(rep.coeffs == 0)

    def test_too_short(self):
        with pytest.raises(SignalTooShort):
            decompose(Signal(np.zeros(int(9.9 * FS)), FS), BandParams())

    def test_minimum_duration_ok(self):
        p = BandParams(range_hz=(0.0, 0.5), spacing_hz=0.1)
        rep = decompose(Signal(np.ones(int(10 * FS)), FS), p)
        assert rep.n_times == 4

    def test_range_beyond_nyquist(self):
        with pytest.raises(InvalidBandRange):
            decompose(Signal(np.zeros(2000), 2.0), BandParams(range_hz=(0, 1.2)))

    def test_energy_partition_white(self):
        # interior bands: mean power equals the per-band share of the energy
        g = np.random.default_rng(77)
        ratios = []
        for _ in range(8):
            x = Signal(g.standard_normal(int(FS * 367)), FS)
            expected = np.sum(x.samples**2) * 0.05 / (FS / 2)
            ratios.append(np.mean(band_powers(decompose(x))[4:-4]) / expected)
        assert np.mean(ratios) == pytest.approx(1.0, abs=0.04)

    def test_energy_partition_tone(self):
        x = tone(0.6)
        rep = decompose(x, BandParams())
        total = band_powers(rep).sum()
        assert total == pytest.approx(np.sum(x.samples**2), rel=0.01)

    def test_white_noise_gives_white_coefficients(self, white_rep):
        col = white_rep.coeffs[:, 12]
        col = col - col.mean()
        ac = np.abs(np.correlate(col, col, "full"))[col.size :] / np.vdot(col, col).real
        assert np.mean(ac[:10]) < 0.15

    def test_tone_energy_concentrates_when_bands_do_not_overlap(self):
        # with spacing 2B neighbouring tapers do not overlap
        p = BandParams(spacing_hz=0.4, range_hz=(0.0, 1.2))
        rep = decompose(tone(0.4), p)
        pw = band_powers(rep)
        k = rep.nearest_band(0.4)
        assert pw[k] / pw.sum() >= 0.9

    def test_tone_spreads_over_neighbours_on_dense_grid(self):
        rep = decompose(tone(0.6), BandParams())
        pw = band_powers(rep)
        k = rep.nearest_band(0.6)
        assert np.argmax(pw) == k
        assert pw[k] / pw.sum() < 0.5

    def test_linearity(self, white_signal):
        g = np.random.default_rng(5)
        y = Signal(g.standard_normal(white_signal.n), FS)
        a, b = 1.7, -0.3
        lhs = decompose(Signal(a * white_signal.samples + b * y.samples, FS)).coeffs
        rhs = a * decompose(white_signal).coeffs + b * decompose(y).coeffs
        assert np.max(np.abs(lhs - rhs)) <= 1e-9 * np.max(np.abs(rhs))

    def test_time_shift_rotates_phase(self):
        x = tone(0.3, phase=0.4).samples
        k = 1
        a = decompose(Signal(x, FS)).coeffs
        b = decompose(Signal(np.roll(x, k), FS)).coeffs
        rep = decompose(Signal(x, FS))
        j = rep.nearest_band(0.3)
        rot = np.exp(-2j * np.pi * rep.band_centers_hz[j] * k / FS)
        err = np.linalg.norm(b[:, j] - rot * a[:, j]) / np.linalg.norm(a[:, j])
        assert err < 0.02

    def test_self_coherence_one(self, white_rep):
        c = coherence(white_rep, white_rep).values
        assert np.allclose(c, 1.0, atol=1e-9)

    def test_rectangular_taper(self, white_signal):
        rep = decompose(white_signal, BandParams(taper="rectangular"))
        assert rep.coeffs.shape == (146, 25)
        assert np.all(np.isfinite(rep.coeffs))


class TestTaper:
    @pytest.mark.parametrize("taper", ["raised_cosine", "rectangular"])
    @pytest.mark.parametrize("n_t", [7, 146, 147])
    def test_power_complementary(self, taper, n_t):
        offsets = np.arange(-3 * n_t, 3 * n_t)
        w2 = taper_weights(offsets, n_t, taper) ** 2
        folded = np.zeros(n_t)
        np.add.at(folded, offsets % n_t, w2)
        assert np.allclose(folded, 1.0)

    def test_half_power_at_half_width(self):
        # B is the half-power half-width: offset T/2 bins sits at |w|^2 = 1/2
        n_t = 146
        assert taper_weights([n_t // 2], n_t)[0] ** 2 == pytest.approx(0.5)


class TestPeakAndPower:
    def test_peak_of_tone(self):
        rep = decompose(tone(0.3))
        k, f = peak_frequency(rep)
        assert k == rep.nearest_band(0.3)
        assert f == pytest.approx(0.3, abs=0.01)

    def test_single_band(self):
        assert peak_frequency(make_rep(np.ones(5)))[0] == 0

    def test_tie_goes_low(self):
        assert peak_frequency(make_rep(np.ones((4, 3))))[0] == 0

    def test_all_zero(self):
        with pytest.raises(NoPeak):
            peak_frequency(make_rep(np.zeros((4, 3))))

    def test_band_power_examples(self):
        assert band_power(make_rep(np.zeros(4)), 0) == 0
        assert band_power(make_rep(np.full(4, 2 - 1j)), 0) == pytest.approx(5.0)
        assert band_power(make_rep([1, 1j, -1]), 0) == pytest.approx(1.0)

    @pytest.mark.parametrize("k", [-1, 3, 1.5, True])
    def test_band_power_bad_index(self, k):
        with pytest.raises(BadIndex):
            band_power(make_rep(np.ones((4, 3))), k)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=1e3))
    def test_peak_scale_invariant(self, scale):
        x = tone(0.45, duration=60.0).samples + 0.3 * tone(0.8, duration=60.0).samples
        a = peak_frequency(decompose(Signal(x, FS)))
        b = peak_frequency(decompose(Signal(scale * x, FS)))
        assert a == b


class TestBandRep:
    def test_validation(self):
        with pytest.raises(SignalTooShort):
            BandRep(np.ones((1, 2)), [0.1, 0.2], 1.0)
        with pytest.raises(ValueError):
            BandRep(np.ones((3, 2)), [0.2, 0.1], 1.0)
        with pytest.raises(ValueError):
            BandRep(np.full((3, 1), np.nan), [0.1], 1.0)


class TestTransformer:
    def test_matches_function(self, white_signal, white_rep):
        tr = BandTransformer(fs_hz=FS).fit(white_signal.samples)
        out = tr.transform(white_signal.samples)
        assert np.array_equal(out, white_rep.coeffs)
        assert np.array_equal(tr.band_centers_, white_rep.band_centers_hz)

    def test_batch_and_params(self, white_signal):
        tr = BandTransformer(fs_hz=FS, range_hz=(0.0, 0.6))
        batch = np.stack([white_signal.samples, -white_signal.samples])
        out = tr.fit_transform(batch)
        assert out.shape == (2, 146, 13)
        assert np.allclose(out[0], -out[1])
        assert tr.get_params()["range_hz"] == (0.0, 0.6)

    def test_length_check(self, white_signal):
        tr = BandTransformer(fs_hz=FS).fit(white_signal.samples)
        with pytest.raises(ValueError):
            tr.transform(white_signal.samples[:-10])
