import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cryscreen import features
from cryscreen.audio_io import AudioBuffer
from cryscreen.errors import DegenerateFilter, EmptyAfterTrim, SilentSignal
from cryscreen.features import (
    FeatureConfig,
    add_noise,
    build_mel_filterbank,
    dct2,
    extract_mfcc,
    hz_to_mel,
    log_mel_energies,
    mel_to_hz,
)


def dct2_bruteforce(e):
    """Direct double-loop evaluation of the DCT-II definition."""
    m = len(e)
    return np.array([
        math.fsum(e[n] * math.cos(math.pi * k * (n + 0.5) / m) for n in range(m))
        for k in range(m)
    ])


class TestMelScale:
    def test_zero_hz(self):
        assert hz_to_mel(0.0) == 0.0

    def test_700_hz(self):
        assert hz_to_mel(700.0) == pytest.approx(2595 * math.log10(2), rel=1e-12)

    def test_1000_hz_lands_near_1000_mel(self):
        assert hz_to_mel(1000.0) == pytest.approx(999.99, abs=0.01)

    @pytest.mark.parametrize("f", [50.0, 440.0, 4000.0])
    def test_inverse_identity(self, f):
        assert mel_to_hz(hz_to_mel(f)) == pytest.approx(f, rel=1e-9)

    def test_inverse_of_781(self):
        assert mel_to_hz(2595 * math.log10(2)) == pytest.approx(700.0, rel=1e-9)

    def test_strictly_increasing(self):
        f = np.linspace(0, 8000, 200)
        assert np.all(np.diff(hz_to_mel(f)) > 0)


class TestMelFilterbank:
    def test_default_structure(self, pipeline_cfg):
        cfg = pipeline_cfg.feature_cfg
        bank = build_mel_filterbank(cfg, 512)
        assert bank.weights.shape == (40, 257)
        assert np.all(bank.weights >= 0)
        assert np.allclose(bank.weights.max(axis=1), 1.0)
        assert np.all(np.diff(bank.center_freqs_hz) > 0)

    def test_rows_unimodal(self, pipeline_cfg):
        bank = build_mel_filterbank(pipeline_cfg.feature_cfg, 512)
        for row in bank.weights:
            peak = np.argmax(row)
            assert np.all(np.diff(row[:peak + 1]) >= 0)
            assert np.all(np.diff(row[peak:]) <= 0)

    def test_single_filter(self):
        cfg = FeatureConfig(n_mel_filters=1, n_mfcc=1)
        bank = build_mel_filterbank(cfg, 512)
        assert bank.weights.shape[0] == 1
        assert bank.weights.max() == 1.0

    def test_degenerate_when_fft_too_small(self):
        cfg = FeatureConfig(n_mel_filters=40, n_mfcc=13)
        with pytest.raises(DegenerateFilter):
            build_mel_filterbank(cfg, 64)

    def test_flat_spectrum_gives_row_sums(self, pipeline_cfg):
        bank = build_mel_filterbank(pipeline_cfg.feature_cfg, 512)
        out = bank.weights @ np.ones(257)
        assert out == pytest.approx(bank.weights.sum(axis=1))


class TestLogMelEnergies:
    def test_zero_spectrum_hits_floor(self, pipeline_cfg):
        bank = build_mel_filterbank(pipeline_cfg.feature_cfg, 512)
        e = log_mel_energies(np.zeros(257), bank, 1e-10)
        assert np.allclose(e, math.log(1e-10))

    def test_scaling_shifts_by_log_gain(self, pipeline_cfg, rng):
        bank = build_mel_filterbank(pipeline_cfg.feature_cfg, 512)
        p = rng.uniform(0.1, 1.0, 257)
        base = log_mel_energies(p, bank, 1e-10)
        scaled = log_mel_energies(3.0 * p, bank, 1e-10)
        assert scaled - base == pytest.approx(np.full(40, math.log(3.0)), abs=1e-9)

    def test_tone_argmax_tracks_frequency(self, pipeline_cfg):
        cfg = pipeline_cfg.feature_cfg
        bank = build_mel_filterbank(cfg, 512)
        for tone_hz in (300.0, 1000.0, 3000.0, 6000.0):
            p = np.zeros(257)
            p[int(round(tone_hz * 512 / cfg.sample_rate_hz))] = 1.0
            e = log_mel_energies(p, bank, 1e-10)
            winner = int(np.argmax(e))
            nearest = int(np.argmin(np.abs(bank.center_freqs_hz - tone_hz)))
            assert abs(winner - nearest) <= 1


class TestDct2:
    def test_constant_input(self):
        out = dct2(np.ones(12))
        assert out[0] == pytest.approx(12.0)
        assert np.max(np.abs(out[1:])) < 1e-12

    def test_length_one(self):
        assert dct2(np.array([4.2])) == pytest.approx([4.2])

    def test_matches_bruteforce_m8(self, rng):
        e = rng.standard_normal(8)
        assert np.max(np.abs(dct2(e) - dct2_bruteforce(e))) < 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 64), st.integers(0, 2 ** 31 - 1))
    def test_matches_bruteforce(self, m, seed):
        e = np.random.default_rng(seed).standard_normal(m)
        assert np.max(np.abs(dct2(e) - dct2_bruteforce(e))) < 1e-12

    def test_batched(self, rng):
        e = rng.standard_normal((4, 16))
        out = dct2(e)
        for i in range(4):
            assert np.allclose(out[i], dct2(e[i]))


class TestExtractMfcc:
    def test_silence_raises(self, pipeline_cfg):
        buf = AudioBuffer(np.zeros(16000), 16000)
        with pytest.raises(EmptyAfterTrim):
            extract_mfcc(buf, pipeline_cfg.feature_cfg)

    def test_frame_count_for_one_second(self, pipeline_cfg, rng):
        # keep every sample above the trim threshold so nothing is removed
        x = rng.uniform(0.1, 0.9, 16000) * np.where(rng.uniform(size=16000) < 0.5, -1, 1)
        mfcc = extract_mfcc(AudioBuffer(x, 16000), pipeline_cfg.feature_cfg)
        assert mfcc.vectors.shape == (98, 13)

    def test_deterministic(self, pipeline_cfg, rng):
        x = rng.uniform(0.05, 0.5, 8000)
        a = extract_mfcc(AudioBuffer(x, 16000), pipeline_cfg.feature_cfg)
        b = extract_mfcc(AudioBuffer(x.copy(), 16000), pipeline_cfg.feature_cfg)
        assert np.array_equal(a.vectors, b.vectors)

    def test_rate_mismatch_rejected(self, pipeline_cfg, rng):
        buf = AudioBuffer(rng.uniform(-0.5, 0.5, 8000), 8000)
        with pytest.raises(ValueError):
            extract_mfcc(buf, pipeline_cfg.feature_cfg)

    def test_gain_invariance(self, rng):
        cfg = FeatureConfig(trim_threshold=0.0)
        x = rng.uniform(-0.099, 0.099, 8000)
        base = extract_mfcc(AudioBuffer(x, 16000), cfg).vectors
        for gain in (0.1, 2.0, 10.0):
            scaled = extract_mfcc(AudioBuffer(gain * x, 16000), cfg).vectors
            assert np.max(np.abs(scaled[:, 1:] - base[:, 1:])) < 1e-6
            expected_shift = cfg.n_mel_filters * math.log(gain ** 2)
            assert scaled[:, 0] - base[:, 0] == pytest.approx(
                np.full(base.shape[0], expected_shift), abs=1e-6)

    def test_config_digest_binds_config(self, pipeline_cfg, rng):
        x = rng.uniform(0.05, 0.5, 8000)
        mfcc = extract_mfcc(AudioBuffer(x, 16000), pipeline_cfg.feature_cfg)
        assert mfcc.config_digest == pipeline_cfg.feature_cfg.digest()
        other = FeatureConfig(n_mfcc=12)
        assert other.digest() != mfcc.config_digest


class TestAddNoise:
    def test_infinite_snr_returns_input(self, rng):
        buf = AudioBuffer(rng.uniform(-0.5, 0.5, 100), 16000)
        assert add_noise(buf, math.inf, seed=1) is buf

    def test_snr_zero_matches_signal_power(self):
        # low amplitude so the sum never clips and the noise addend can be
        # recovered exactly as noisy - clean
        t = np.arange(16000) / 16000
        x = 0.1 * np.sin(2 * np.pi * 440 * t)
        buf = AudioBuffer(x, 16000)
        signal_power = np.mean(x ** 2)
        noisy = add_noise(buf, 0.0, seed=3)
        noise = noisy.samples - x
        assert np.mean(noise ** 2) == pytest.approx(signal_power, rel=0.05)

    def test_snr_20db_power_ratio(self):
        t = np.arange(16000) / 16000
        x = 0.3 * np.sin(2 * np.pi * 500 * t)
        buf = AudioBuffer(x, 16000)
        noisy = add_noise(buf, 20.0, seed=11)
        noise = noisy.samples - x
        ratio_db = 10 * math.log10(np.mean(x ** 2) / np.mean(noise ** 2))
        assert ratio_db == pytest.approx(20.0, abs=0.2)

    def test_deterministic_per_seed(self, rng):
        buf = AudioBuffer(rng.uniform(-0.5, 0.5, 500), 16000)
        a = add_noise(buf, 10.0, seed=7)
        b = add_noise(buf, 10.0, seed=7)
        assert np.array_equal(a.samples, b.samples)
        c = add_noise(buf, 10.0, seed=8)
        assert not np.array_equal(a.samples, c.samples)

    def test_silent_signal_rejected(self):
        with pytest.raises(SilentSignal):
            add_noise(AudioBuffer(np.zeros(100), 16000), 20.0, seed=0)

    def test_output_clipped(self, rng):
        buf = AudioBuffer(rng.uniform(-0.9, 0.9, 2000), 16000)
        noisy = add_noise(buf, -10.0, seed=5)
        assert noisy.samples.max() <= 1.0 and noisy.samples.min() >= -1.0


class TestFeatureConfig:
    def test_defaults_valid(self):
        FeatureConfig().validate()

    @pytest.mark.parametrize("kwargs", [
        {"fmin_hz": 0.0}, {"fmax_hz": 9000.0}, {"n_mfcc": 50},
        {"log_floor": 0.0}, {"pre_emphasis_alpha": 1.0},
        {"frame_len_ms": 0.0},
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            FeatureConfig(**kwargs)

    def test_frame_sizes_at_16k(self):
        cfg = FeatureConfig()
        assert cfg.frame_len_samples == 400
        assert cfg.hop_len_samples == 160
        assert cfg.fft_size == 512
