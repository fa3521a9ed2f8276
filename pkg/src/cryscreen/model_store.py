"""Versioned binary persistence for trained models (.ubw files).

A model file is self-describing: it carries the full pipeline and feature
configuration next to the SVM payload, and ends with a SHA-256 digest of
everything before it. Layout (all little-endian, reals IEEE-754 binary64,
counts u32, enums u8; matrices row-major behind a (rows, cols) prefix):

    magic "UBW1" | version u32
    feature cfg  : rate u32, frame_ms f64, hop_ms f64, alpha f64,
                   n_mel u32, n_mfcc u32, fmin f64, fmax f64,
                   log_floor f64, trim_threshold f64
    pipeline cfg : segment_len_s f64, min_segments u32, pooling u8
    kernel       : kind u8 (0 linear, 1 rbf), gamma f64 (0 for linear)
    standardizer : dim u32, means f64[dim], stds f64[dim], const u8[dim]
    support vecs : rows u32, cols u32, f64[rows*cols]
    dual coefs   : n u32, f64[n]
    bias f64
    training meta: C f64, tolerance f64, max_passes u32, seed i64,
                   n_passes_run u32, converged u8, violations u32
    digest       : sha256 of all preceding bytes (32 bytes)

The digest's first 8 hex characters are the model_digest shown in
diagnoses and the UI.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .errors import (
    BadMagic,
    DigestMismatch,
    IoFailure,
    Truncated,
    UnsupportedVersion,
)
from .features import FeatureConfig
from .pipeline import PipelineConfig
from .svm import KernelSpec, Standardizer, SvmModel, TrainingMeta

MAGIC = b"UBW1"
FORMAT_VERSION = 1

_POOLING_CODES = {"mean_std": 0}
_KERNEL_CODES = {"linear": 0, "rbf": 1}
_POOLING_NAMES = {v: k for k, v in _POOLING_CODES.items()}
_KERNEL_NAMES = {v: k for k, v in _KERNEL_CODES.items()}


def serialize_model(model: SvmModel, cfg: PipelineConfig) -> bytes:
    """Deterministic byte image of (model, config), digest included."""
    f = cfg.feature_cfg
    parts = [
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<IdddIIdddd",
                    f.sample_rate_hz, f.frame_len_ms, f.hop_len_ms,
                    f.pre_emphasis_alpha, f.n_mel_filters, f.n_mfcc,
                    f.fmin_hz, f.fmax_hz, f.log_floor, f.trim_threshold),
        struct.pack("<dIB", cfg.segment_len_s, cfg.min_segments,
                    _POOLING_CODES[cfg.pooling]),
        struct.pack("<Bd", _KERNEL_CODES[model.kernel.kind],
                    model.kernel.gamma if model.kernel.kind == "rbf" else 0.0),
    ]
    s = model.standardizer
    dim = len(s.means)
    parts.append(struct.pack("<I", dim))
    parts.append(np.asarray(s.means, dtype="<f8").tobytes())
    parts.append(np.asarray(s.stds, dtype="<f8").tobytes())
    parts.append(np.asarray(s.constant_mask, dtype=np.uint8).tobytes())

    rows, cols = model.support_vectors.shape
    parts.append(struct.pack("<II", rows, cols))
    parts.append(np.ascontiguousarray(model.support_vectors, dtype="<f8").tobytes())
    parts.append(struct.pack("<I", len(model.dual_coefs)))
    parts.append(np.asarray(model.dual_coefs, dtype="<f8").tobytes())
    parts.append(struct.pack("<d", model.bias))

    m = model.training_meta
    parts.append(struct.pack("<ddIqIBI", m.C, m.tolerance, m.max_passes,
                             m.seed, m.n_passes_run, int(m.converged),
                             m.kkt_violations))
    payload = b"".join(parts)
    return payload + hashlib.sha256(payload).digest()


def model_digest(model: SvmModel, cfg: PipelineConfig) -> str:
    """Full hex digest of the serialized form, without touching disk."""
    return hashlib.sha256(serialize_model(model, cfg)[:-32]).hexdigest()


def short_digest(hex_digest: str) -> str:
    return hex_digest[:8]


def save_model(model: SvmModel, cfg: PipelineConfig, path) -> str:
    """Write the model file; returns its full hex digest."""
    blob = serialize_model(model, cfg)
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        raise IoFailure(f"cannot write model file {path}: {exc}") from exc
    return hashlib.sha256(blob[:-32]).hexdigest()


class _Cursor:
    """Bounds-checked reader; running past the end means a truncated file."""

    def __init__(self, data: bytes, offset: int):
        self.data = data
        self.offset = offset

    def take(self, n: int) -> bytes:
        end = self.offset + n
        if end > len(self.data):
            raise Truncated(f"file ends inside a field at byte {self.offset}")
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").copy()


def load_model(path) -> tuple[SvmModel, PipelineConfig, str]:
    """Read and validate a .ubw file.

    Magic, version and digest are all checked before any object is built.
    Returns (model, pipeline config, full hex digest).
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read model file {path}: {exc}") from exc
    return deserialize_model(data)


def deserialize_model(data: bytes) -> tuple[SvmModel, PipelineConfig, str]:
    if len(data) < 8 + 32:
        raise Truncated("file shorter than header plus digest")
    if data[0:4] != MAGIC:
        raise BadMagic(f"bad magic {data[0:4]!r}")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"format version {version} not supported")

    cur = _Cursor(data, 8)
    feat = cur.unpack("<IdddIIdddd")
    pipe = cur.unpack("<dIB")
    kernel_code, gamma = cur.unpack("<Bd")
    (dim,) = cur.unpack("<I")
    means = cur.floats(dim)
    stds = cur.floats(dim)
    const_mask = np.frombuffer(cur.take(dim), dtype=np.uint8).astype(bool)
    rows, cols = cur.unpack("<II")
    sv = cur.floats(rows * cols).reshape(rows, cols)
    (n_dual,) = cur.unpack("<I")
    duals = cur.floats(n_dual)
    (bias,) = cur.unpack("<d")
    meta_raw = cur.unpack("<ddIqIBI")

    remaining = len(data) - cur.offset
    if remaining < 32:
        raise Truncated("digest missing or incomplete")
    expected = hashlib.sha256(data[:cur.offset]).digest()
    if remaining != 32 or data[cur.offset:cur.offset + 32] != expected:
        raise DigestMismatch("stored digest does not match file contents")

    if kernel_code not in _KERNEL_NAMES:
        raise UnsupportedVersion(f"unknown kernel code {kernel_code}")
    if pipe[2] not in _POOLING_NAMES:
        raise UnsupportedVersion(f"unknown pooling code {pipe[2]}")

    feature_cfg = FeatureConfig(
        sample_rate_hz=feat[0], frame_len_ms=feat[1], hop_len_ms=feat[2],
        pre_emphasis_alpha=feat[3], n_mel_filters=feat[4], n_mfcc=feat[5],
        fmin_hz=feat[6], fmax_hz=feat[7], log_floor=feat[8],
        trim_threshold=feat[9])
    pipeline_cfg = PipelineConfig(feature_cfg=feature_cfg, segment_len_s=pipe[0],
                                  min_segments=pipe[1],
                                  pooling=_POOLING_NAMES[pipe[2]])
    kind = _KERNEL_NAMES[kernel_code]
    kernel = KernelSpec(kind=kind, gamma=gamma if kind == "rbf" else None)
    model = SvmModel(
        kernel=kernel,
        standardizer=Standardizer(means=means, stds=stds, constant_mask=const_mask),
        support_vectors=sv,
        dual_coefs=duals,
        bias=bias,
        training_meta=TrainingMeta(
            C=meta_raw[0], tolerance=meta_raw[1], max_passes=meta_raw[2],
            seed=meta_raw[3], n_passes_run=meta_raw[4],
            converged=bool(meta_raw[5]), kkt_violations=meta_raw[6]),
    )
    return model, pipeline_cfg, hashlib.sha256(data[:-32]).hexdigest()
