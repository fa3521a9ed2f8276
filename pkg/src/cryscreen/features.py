"""MFCC extraction: mel filterbank, log energies, DCT-II, plus the
white-noise augmentation used by the robustness evaluation.

The full chain is trim -> pre-emphasis -> frame -> Hann -> FFT -> power
spectrum -> log-mel -> DCT-II, keeping the first n_mfcc coefficients per
frame. Coefficient 0 (overall log energy) is kept as a feature. All
hyperparameters live in FeatureConfig and travel with trained models.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np

from . import dsp
from .audio_io import AudioBuffer
from .errors import DegenerateFilter, SilentSignal

DEFAULT_SAMPLE_RATE_HZ = 16000


@dataclass(frozen=True)
class FeatureConfig:
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE_HZ
    frame_len_ms: float = 25.0
    hop_len_ms: float = 10.0
    pre_emphasis_alpha: float = 0.97
    n_mel_filters: int = 40
    n_mfcc: int = 13
    fmin_hz: float = 50.0
    fmax_hz: float = 8000.0
    log_floor: float = 1e-10
    trim_threshold: float = 0.02

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if not (0 < self.fmin_hz < self.fmax_hz <= self.sample_rate_hz / 2):
            raise ValueError("need 0 < fmin_hz < fmax_hz <= sample_rate_hz/2")
        if self.n_mfcc > self.n_mel_filters:
            raise ValueError("n_mfcc must not exceed n_mel_filters")
        if self.n_mfcc < 1 or self.n_mel_filters < 1:
            raise ValueError("n_mfcc and n_mel_filters must be >= 1")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")
        if not (0 <= self.pre_emphasis_alpha < 1):
            raise ValueError("pre_emphasis_alpha must be in [0, 1)")
        if self.trim_threshold < 0:
            raise ValueError("trim_threshold must be >= 0")
        if self.frame_len_ms <= 0 or self.hop_len_ms <= 0:
            raise ValueError("frame and hop lengths must be positive")

    @property
    def frame_len_samples(self) -> int:
        return int(round(self.frame_len_ms * self.sample_rate_hz / 1000.0))

    @property
    def hop_len_samples(self) -> int:
        return int(round(self.hop_len_ms * self.sample_rate_hz / 1000.0))

    @property
    def fft_size(self) -> int:
        return dsp.next_pow2(self.frame_len_samples)

    def digest(self) -> str:
        """Short identifier binding features to the exact configuration."""
        text = ";".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return hashlib.sha256(text.encode()).hexdigest()[:8]


@dataclass(frozen=True)
class MelFilterbank:
    """Triangular filters over FFT bins; row i peaks at 1.0 on its center bin."""

    weights: np.ndarray         # (n_mel_filters, fft_size/2 + 1)
    center_freqs_hz: np.ndarray

    @property
    def n_filters(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class MfccMatrix:
    """Per-frame coefficient vectors, shape (n_frames, n_mfcc)."""

    vectors: np.ndarray
    config_digest: str

    @property
    def n_frames(self) -> int:
        return self.vectors.shape[0]


def hz_to_mel(f):
    """mel = 2595 log10(1 + f/700); strictly increasing, 0 Hz -> 0 mel."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    """Exact inverse of hz_to_mel."""
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def build_mel_filterbank(cfg: FeatureConfig, fft_size: int) -> MelFilterbank:
    """Place n_mel_filters triangles with edges uniform on the mel scale
    between fmin and fmax, snapped to the nearest FFT bin center."""
    n_bins = fft_size // 2 + 1
    edges_mel = np.linspace(hz_to_mel(cfg.fmin_hz), hz_to_mel(cfg.fmax_hz),
                            cfg.n_mel_filters + 2)
    edges_hz = mel_to_hz(edges_mel)
    edge_bins = np.rint(edges_hz * fft_size / cfg.sample_rate_hz).astype(int)
    edge_bins = np.clip(edge_bins, 0, n_bins - 1)
    if np.any(np.diff(edge_bins) < 1):
        raise DegenerateFilter(
            f"fft_size {fft_size} cannot resolve {cfg.n_mel_filters} mel filters "
            f"between {cfg.fmin_hz} and {cfg.fmax_hz} Hz")

    weights = np.zeros((cfg.n_mel_filters, n_bins))
    for i in range(cfg.n_mel_filters):
        left, center, right = edge_bins[i], edge_bins[i + 1], edge_bins[i + 2]
        up = np.arange(left, center + 1)
        weights[i, up] = (up - left) / (center - left)
        down = np.arange(center, right + 1)
        weights[i, down] = (right - down) / (right - center)
        weights[i, center] = 1.0
    centers_hz = edge_bins[1:-1] * cfg.sample_rate_hz / fft_size
    return MelFilterbank(weights=weights, center_freqs_hz=centers_hz.astype(np.float64))


def log_mel_energies(power_spec: np.ndarray, bank: MelFilterbank,
                     log_floor: float) -> np.ndarray:
    """e[i] = ln(max(row_i . P, log_floor)); batched over leading axes."""
    power_spec = np.asarray(power_spec, dtype=np.float64)
    if power_spec.shape[-1] != bank.weights.shape[1]:
        raise ValueError("power spectrum length does not match filterbank")
    energies = power_spec @ bank.weights.T
    return np.log(np.maximum(energies, log_floor))


@lru_cache(maxsize=16)
def _dct2_matrix(m: int) -> np.ndarray:
    k = np.arange(m)[:, None]
    n = np.arange(m)[None, :]
    mat = np.cos(np.pi * k * (n + 0.5) / m)
    mat.flags.writeable = False
    return mat


def dct2(e: np.ndarray) -> np.ndarray:
    """Unnormalized DCT-II: c[k] = sum_n e[n] cos(pi k (n + 0.5) / M)."""
    e = np.asarray(e, dtype=np.float64)
    m = e.shape[-1]
    if m < 1:
        raise ValueError("input must be non-empty")
    return e @ _dct2_matrix(m).T


@lru_cache(maxsize=16)
def _cached_filterbank(cfg: FeatureConfig, fft_size: int) -> MelFilterbank:
    return build_mel_filterbank(cfg, fft_size)


def extract_mfcc(buf: AudioBuffer, cfg: FeatureConfig) -> MfccMatrix:
    """Run the full MFCC chain on one buffer.

    Raises EmptyAfterTrim when nothing exceeds the trim threshold and
    InputTooShort when the trimmed signal is shorter than one frame.
    """
    if buf.sample_rate_hz != cfg.sample_rate_hz:
        raise ValueError(
            f"buffer rate {buf.sample_rate_hz} != configured {cfg.sample_rate_hz}; "
            "resample before extraction")
    trimmed = dsp.trim_silence(buf, cfg.trim_threshold)
    emphasized = dsp.pre_emphasis(trimmed.samples, cfg.pre_emphasis_alpha)
    frames = dsp.frame_signal(emphasized, cfg.frame_len_samples,
                              cfg.hop_len_samples, cfg.sample_rate_hz)
    windowed = dsp.hann_window(frames.frames)

    fft_size = cfg.fft_size
    padded = np.zeros((windowed.shape[0], fft_size))
    padded[:, : windowed.shape[1]] = windowed
    spectra = dsp.fft_radix2(padded)
    power = dsp.power_spectrum(spectra)

    bank = _cached_filterbank(cfg, fft_size)
    logmel = log_mel_energies(power, bank, cfg.log_floor)
    coeffs = dct2(logmel)[:, : cfg.n_mfcc]
    return MfccMatrix(vectors=coeffs, config_digest=cfg.digest())


def add_noise(buf: AudioBuffer, snr_db: float, seed: int) -> AudioBuffer:
    """Add zero-mean white noise at the requested signal-to-noise ratio.

    snr_db = +inf is the documented no-noise sentinel. The noise is scaled
    to its measured power, so the realized SNR is exact; the mixed output
    is clipped to [-1, 1]. Deterministic for a fixed seed.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return buf
    signal_power = float(np.mean(buf.samples ** 2))
    if signal_power == 0.0:
        raise SilentSignal("SNR is undefined for an all-zero signal")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(buf))
    target_power = signal_power / (10.0 ** (snr_db / 10.0))
    noise *= math.sqrt(target_power / float(np.mean(noise ** 2)))
    mixed = np.clip(buf.samples + noise, -1.0, 1.0)
    return AudioBuffer(mixed, buf.sample_rate_hz)
