"""WAV decoding and waveform canonicalization.

Accepts RIFF/WAVE containers with integer PCM (format code 1, 8/16/24/32
bit) or 32-bit IEEE float payloads (format code 3) and produces mono
float64 waveforms in [-1, 1]. Also provides the matching encoder used by
the synthetic-corpus generator and a linear resampler for bringing field
recordings to the canonical 16 kHz rate.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyData,
    LengthMismatch,
    MalformedHeader,
    UnsupportedEncoding,
)

CANONICAL_RATE_HZ = 16000

_FMT_PCM = 1
_FMT_IEEE_FLOAT = 3


@dataclass(frozen=True)
class AudioBuffer:
    """Mono waveform: float64 samples in [-1, 1] plus their sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1:
            raise ValueError("AudioBuffer holds a single channel")
        if s.size and (np.min(s) < -1.0 or np.max(s) > 1.0):
            raise ValueError("samples must lie in [-1, 1]")
        object.__setattr__(self, "samples", s)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class WavInfo:
    channels: int
    bits_per_sample: int
    source_rate_hz: int
    num_frames: int


def parse_wav(data: bytes) -> tuple[WavInfo, list[np.ndarray]]:
    """Decode a RIFF/WAVE byte string into per-channel float64 sequences.

    The "fmt " chunk must precede "data"; any other chunks are skipped.
    Integer PCM is scaled by 2^(bits-1), floats are clipped to [-1, 1].
    """
    if len(data) < 12:
        raise MalformedHeader("file shorter than RIFF header")
    if data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeader("not a RIFF/WAVE container")

    fmt = None
    payload = None
    offset = 12
    while offset + 8 <= len(data):
        cid = data[offset:offset + 4]
        (size,) = struct.unpack_from("<I", data, offset + 4)
        body_start = offset + 8
        body_end = body_start + size
        if cid == b"fmt ":
            if size < 16 or body_end > len(data):
                raise MalformedHeader("fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
        elif cid == b"data":
            if fmt is None:
                raise MalformedHeader("data chunk precedes fmt chunk")
            if body_end > len(data):
                raise MalformedHeader("data chunk truncated")
            payload = data[body_start:body_end]
            break
        # unknown chunk: skip (chunks are word-aligned)
        offset = body_end + (size & 1)

    if fmt is None:
        raise MalformedHeader("missing fmt chunk")
    if payload is None:
        raise MalformedHeader("missing data chunk")

    format_code, channels, rate, _byte_rate, _block_align, bits = fmt
    if format_code not in (_FMT_PCM, _FMT_IEEE_FLOAT):
        raise UnsupportedEncoding(f"format code {format_code} not supported (PCM or IEEE float only)")
    if channels < 1:
        raise MalformedHeader("channel count must be >= 1")
    if rate <= 0:
        raise MalformedHeader("sample rate must be positive")
    if format_code == _FMT_PCM and bits not in (8, 16, 24, 32):
        raise UnsupportedEncoding(f"{bits}-bit integer PCM not supported")
    if format_code == _FMT_IEEE_FLOAT and bits != 32:
        raise UnsupportedEncoding(f"{bits}-bit float not supported (32-bit only)")

    frame_size = channels * (bits // 8)
    num_frames = len(payload) // frame_size
    if num_frames == 0:
        raise EmptyData("data chunk holds zero frames")
    payload = payload[: num_frames * frame_size]

    flat = _decode_samples(payload, format_code, bits)
    info = WavInfo(channels=channels, bits_per_sample=bits,
                   source_rate_hz=rate, num_frames=num_frames)
    per_channel = [np.ascontiguousarray(flat[c::channels]) for c in range(channels)]
    return info, per_channel


def _decode_samples(payload: bytes, format_code: int, bits: int) -> np.ndarray:
    if format_code == _FMT_IEEE_FLOAT:
        x = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        return np.clip(x, -1.0, 1.0)
    if bits == 8:
        # 8-bit WAV PCM is unsigned with midpoint 128
        x = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
        return (x - 128.0) / 128.0
    if bits == 16:
        return np.frombuffer(payload, dtype="<i2").astype(np.float64) / 32768.0
    if bits == 24:
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        val = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        val = np.where(val & 0x800000, val - 0x1000000, val)  # sign extension
        return val.astype(np.float64) / float(2 ** 23)
    if bits == 32:
        return np.frombuffer(payload, dtype="<i4").astype(np.float64) / float(2 ** 31)
    raise UnsupportedEncoding(f"{bits}-bit payload")


def to_mono(channels: list[np.ndarray]) -> np.ndarray:
    """Element-wise arithmetic mean across channels."""
    if not channels:
        raise LengthMismatch("no channels given")
    n = len(channels[0])
    if any(len(c) != n for c in channels):
        raise LengthMismatch("channels differ in length")
    if len(channels) == 1:
        return np.asarray(channels[0], dtype=np.float64)
    return np.mean(np.stack(channels), axis=0)


def resample_linear(buf: AudioBuffer, target_rate_hz: int) -> AudioBuffer:
    """Resample by linear interpolation at positions n * source/target.

    Output length is floor(len * target / source). A same-rate call returns
    the input unchanged. Output values never leave [min(in), max(in)].
    """
    if target_rate_hz <= 0:
        raise ValueError("target_rate_hz must be positive")
    if len(buf) == 0:
        raise ValueError("cannot resample an empty buffer")
    if target_rate_hz == buf.sample_rate_hz:
        return buf
    src = buf.samples
    out_len = (len(src) * target_rate_hz) // buf.sample_rate_hz
    positions = np.arange(out_len, dtype=np.float64) * (buf.sample_rate_hz / target_rate_hz)
    out = np.interp(positions, np.arange(len(src), dtype=np.float64), src)
    return AudioBuffer(out, target_rate_hz)


def encode_wav(samples: np.ndarray, sample_rate_hz: int, fmt: str = "pcm16") -> bytes:
    """Encode one mono channel as a WAV byte string.

    fmt is 'pcm16' (values scaled by 32768, clipped to int16 range) or
    'float32' (raw IEEE floats). The result round-trips through parse_wav.
    """
    x = np.asarray(samples, dtype=np.float64)
    if fmt == "pcm16":
        pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
        body = pcm.tobytes()
        code, bits = _FMT_PCM, 16
    elif fmt == "float32":
        body = x.astype("<f4").tobytes()
        code, bits = _FMT_IEEE_FLOAT, 32
    else:
        raise ValueError(f"unknown encoding {fmt!r}")
    block_align = bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(body), b"WAVE",
        b"fmt ", 16, code, 1, sample_rate_hz,
        sample_rate_hz * block_align, block_align, bits,
        b"data", len(body),
    )
    return header + body


def write_wav(path, samples: np.ndarray, sample_rate_hz: int, fmt: str = "pcm16") -> None:
    with open(path, "wb") as fh:
        fh.write(encode_wav(samples, sample_rate_hz, fmt))


def load_wav(path_or_bytes, target_rate_hz: int | None = None) -> AudioBuffer:
    """Decode a WAV file (path or raw bytes) to a mono AudioBuffer,
    optionally resampled to target_rate_hz."""
    if isinstance(path_or_bytes, (bytes, bytearray)):
        data = bytes(path_or_bytes)
    else:
        with open(path_or_bytes, "rb") as fh:
            data = fh.read()
    info, channels = parse_wav(data)
    mono = to_mono(channels)
    buf = AudioBuffer(np.clip(mono, -1.0, 1.0), info.source_rate_hz)
    if target_rate_hz is not None and target_rate_hz != buf.sample_rate_hz:
        buf = resample_linear(buf, target_rate_hz)
    return buf
