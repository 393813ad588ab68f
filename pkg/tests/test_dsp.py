import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfsk65.dsp import Spectrum, dft, esd, fft_radix2, histogram, idft
from mfsk65.modem import tone_frequency
from mfsk65.synthesis import SignalFrame, add_awgn, synth_tone

from conftest import brute_force_dft


class TestDft:
    def test_all_ones_length_four(self, config):
        ts = config.sample_period_s
        spectrum = dft(np.ones(4), config)
        assert spectrum.bins == pytest.approx([4 * ts, 0, 0, 0], abs=1e-15)

    def test_unit_impulse_flat(self, config):
        for n in (8, 64, 512):
            x = np.zeros(n)
            x[0] = 1.0
            spectrum = dft(x, config)
            assert spectrum.bins == pytest.approx(np.full(n, config.sample_period_s))

    def test_matches_brute_force_oracle(self, config):
        rng = np.random.default_rng(1)
        frames = rng.normal(size=(8, 4096))
        ours = np.stack([dft(f, config).bins for f in frames])
        oracle = config.sample_period_s * brute_force_dft(frames)
        scale = np.abs(oracle).max()
        assert np.abs(ours - oracle).max() / scale < 1e-6

    def test_non_power_of_two_rejected(self, config):
        with pytest.raises(ValueError):
            dft(np.zeros(1000), config)

    def test_bin_spacing(self, config):
        spectrum = dft(np.zeros(4096), config)
        assert spectrum.bin_spacing_hz == pytest.approx(11025.0 / 4096.0)

    def test_conjugate_symmetry_for_real_input(self, config):
        rng = np.random.default_rng(2)
        bins = dft(rng.normal(size=1024), config).bins
        flipped = np.conj(bins[1:][::-1])
        assert np.abs(bins[1:] - flipped).max() <= 1e-9 * np.abs(bins).max()

    def test_linearity(self, config):
        rng = np.random.default_rng(3)
        x, y = rng.normal(size=(2, 2048))
        a, b = 0.7, -2.3
        lhs = dft(a * x + b * y, config).bins
        rhs = a * dft(x, config).bins + b * dft(y, config).bins
        assert np.abs(lhs - rhs).max() <= 1e-9 * np.abs(lhs).max()

    def test_inverse_roundtrip(self, config):
        rng = np.random.default_rng(4)
        x = rng.normal(size=4096)
        rec = idft(dft(x, config), config)
        assert np.abs(rec - x).max() < 1e-9

    def test_batched_transform_matches_loop(self, config):
        rng = np.random.default_rng(5)
        frames = rng.normal(size=(6, 256))
        batched = fft_radix2(frames)
        looped = np.stack([fft_radix2(f) for f in frames])
        assert np.array_equal(batched, looped)


class TestEsd:
    def test_zero_signal(self, config):
        assert np.all(esd(dft(np.zeros(4096), config)) == 0.0)

    def test_clean_tone_dominant_bin_pair(self, config):
        frame = synth_tone(9, 0.4, config)
        densities = esd(dft(frame, config))
        n = config.frame_len
        k = round(tone_frequency(9, config) * n / config.sample_rate_hz)
        tone_bins = [
            round(tone_frequency(m, config) * n / config.sample_rate_hz)
            for m in range(64)
            if m != 9
        ]
        assert densities[k] == pytest.approx(densities[n - k], rel=1e-12)
        assert max(densities[tone_bins]) < 1e-12 * densities[k]

    def test_parseval(self, config):
        rng = np.random.default_rng(6)
        ts = config.sample_period_s
        for _ in range(100):
            x = rng.normal(size=1024)
            spectrum = dft(x, config)
            lhs = esd(spectrum).sum() * spectrum.bin_spacing_hz
            rhs = ts * np.sum(x**2)
            assert lhs == pytest.approx(rhs, rel=1e-6)


class TestHistogram:
    def test_constant_frame_single_bin(self, config):
        counts, edges = histogram(np.full(4096, 2.5), 10)
        assert counts.sum() == 4096
        assert (counts > 0).sum() == 1

    @given(st.integers(1, 64), st.integers(2, 500))
    @settings(max_examples=25, deadline=None)
    def test_counts_conserved(self, num_bins, n):
        rng = np.random.default_rng(n)
        counts, edges = histogram(rng.normal(size=n), num_bins)
        assert counts.sum() == n
        assert len(edges) == num_bins + 1

    def test_edges_span_data(self):
        x = np.array([-3.0, 0.0, 7.0, 1.5])
        counts, edges = histogram(x, 4)
        assert edges[0] == -3.0 and edges[-1] == 7.0

    def test_empty_frame_rejected(self):
        with pytest.raises(ValueError):
            histogram(np.array([]), 4)

    def test_zero_bins_rejected(self):
        with pytest.raises(ValueError):
            histogram(np.ones(8), 0)

    def test_noise_frame_normality(self, config):
        # Pooled noise-dominated samples at -10 dB pass coarse moment checks.
        from scipy import stats

        rng = np.random.default_rng(7)
        frames = []
        for i in range(245):
            tone = synth_tone(int(rng.integers(0, 64)), float(rng.uniform(0, 2 * np.pi)), config)
            frames.append(add_awgn(tone, -10.0, rng, config).samples)
        pooled = np.concatenate(frames)
        assert pooled.size >= 1_000_000
        assert abs(stats.skew(pooled)) < 0.1
        assert abs(stats.kurtosis(pooled)) < 0.2
