"""Time-domain pre-processing and spectral primitives.

Everything here is pure and deterministic: silence trimming, pre-emphasis,
framing, periodic Hann windowing, an iterative radix-2 FFT, and the
one-sided power spectrum. The FFT accepts batched input (transform along
the last axis) so a whole frame matrix goes through in one call.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio_io import AudioBuffer
from .errors import EmptyAfterTrim, InputTooShort, NotPowerOfTwo


@dataclass(frozen=True)
class FrameMatrix:
    """Fixed-length analysis windows cut from one signal.

    frames has shape (n_frames, frame_len) where
    n_frames = 1 + floor((N - frame_len) / hop_len).
    """

    frames: np.ndarray
    frame_len: int
    hop_len: int
    origin_rate_hz: int

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def trim_silence(buf: AudioBuffer, threshold: float) -> AudioBuffer:
    """Drop the maximal leading and trailing runs with |sample| < threshold.

    Interior silence is untouched. Raises EmptyAfterTrim when every sample
    is below the threshold.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    loud = np.flatnonzero(np.abs(buf.samples) >= threshold)
    if loud.size == 0:
        raise EmptyAfterTrim("no sample reaches the silence threshold")
    first, last = int(loud[0]), int(loud[-1])
    if first == 0 and last == len(buf) - 1:
        return buf
    return AudioBuffer(buf.samples[first:last + 1], buf.sample_rate_hz)


def pre_emphasis(x: np.ndarray, alpha: float) -> np.ndarray:
    """First-order high-pass: y[0] = x[0], y[n] = x[n] - alpha * x[n-1]."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("input must be non-empty")
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - alpha * x[:-1]
    return y


def frame_signal(x: np.ndarray, frame_len: int, hop_len: int,
                 origin_rate_hz: int = 0) -> FrameMatrix:
    """Slice x into overlapping frames; the tail shorter than frame_len is dropped."""
    if frame_len < 1 or hop_len < 1:
        raise ValueError("frame_len and hop_len must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    if len(x) < frame_len:
        raise InputTooShort(f"need at least {frame_len} samples, got {len(x)}")
    windows = np.lib.stride_tricks.sliding_window_view(x, frame_len)[::hop_len]
    return FrameMatrix(frames=np.ascontiguousarray(windows),
                       frame_len=frame_len, hop_len=hop_len,
                       origin_rate_hz=origin_rate_hz)


@lru_cache(maxsize=32)
def _hann_coeffs(length: int) -> np.ndarray:
    n = np.arange(length, dtype=np.float64)
    w = 0.5 * (1.0 - np.cos(2.0 * np.pi * n / length))
    w.flags.writeable = False
    return w


def hann_window(frame: np.ndarray) -> np.ndarray:
    """Multiply by the periodic Hann window w[n] = 0.5 (1 - cos(2 pi n / L)).

    Accepts a single frame or a frame matrix (window applied per row).
    """
    frame = np.asarray(frame, dtype=np.float64)
    length = frame.shape[-1]
    if length < 2:
        raise ValueError("window length must be >= 2")
    return frame * _hann_coeffs(length)


def next_pow2(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1 << (n - 1).bit_length()


@lru_cache(maxsize=32)
def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    rev.flags.writeable = False
    return rev


def fft_radix2(x: np.ndarray) -> np.ndarray:
    """Iterative decimation-in-time radix-2 FFT.

    X[k] = sum_n x[n] exp(-2 pi i k n / N) for N a power of two. Transforms
    along the last axis, so batched frames are supported. Zero-padding up to
    a power of two is the caller's job.
    """
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    if n == 0 or (n & (n - 1)) != 0:
        raise NotPowerOfTwo(f"length {n} is not a power of two")
    if n == 1:
        return x.copy()

    y = x[..., _bit_reverse_indices(n)]
    m = 2
    while m <= n:
        half = m // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / m)
        blocks = y.reshape(*y.shape[:-1], n // m, m)
        upper = blocks[..., :half]
        lower = blocks[..., half:] * twiddle
        y = np.concatenate((upper + lower, upper - lower), axis=-1).reshape(x.shape)
        m <<= 1
    return y


def power_spectrum(spectrum: np.ndarray) -> np.ndarray:
    """One-sided power spectrum P[k] = |X[k]|^2 / N for k = 0 .. N/2."""
    spectrum = np.asarray(spectrum)
    n = spectrum.shape[-1]
    if n % 2 != 0:
        raise ValueError("spectrum length must be even")
    half = spectrum[..., : n // 2 + 1]
    return (half.real ** 2 + half.imag ** 2) / n
