"""End-to-end diagnostic path: trim, cut into fixed-length segments,
classify each segment's pooled MFCC vector, and settle the recording-level
verdict by majority vote.

Tie rule, fixed everywhere: ties resolve to asphyxia. In a screening tool
a false positive costs a referral, a false negative costs a life.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import dsp, svm
from .audio_io import AudioBuffer, resample_linear
from .errors import (
    DimensionMismatch,
    EmptyAfterTrim,
    EmptyVerdicts,
    InputTooShort,
    TooShort,
)
from .features import FeatureConfig, extract_mfcc
from .labels import Label


@dataclass(frozen=True)
class PipelineConfig:
    feature_cfg: FeatureConfig = field(default_factory=FeatureConfig)
    segment_len_s: float = 1.0
    min_segments: int = 1
    pooling: str = "mean_std"

    def __post_init__(self):
        if self.segment_len_s <= 0:
            raise ValueError("segment_len_s must be positive")
        if self.min_segments < 1:
            raise ValueError("min_segments must be >= 1")
        if self.pooling != "mean_std":
            raise ValueError(f"unknown pooling {self.pooling!r}")

    @property
    def feature_dim(self) -> int:
        # per-coefficient mean followed by per-coefficient std
        return 2 * self.feature_cfg.n_mfcc


@dataclass(frozen=True)
class Segment:
    samples: np.ndarray
    start_s: float
    duration_s: float


@dataclass(frozen=True)
class SegmentVerdict:
    label: Label
    decision_value: float
    start_s: float


@dataclass(frozen=True)
class Diagnosis:
    verdict: Label
    segment_verdicts: tuple[SegmentVerdict, ...]
    votes_asphyxia: int
    votes_normal: int
    confidence: float
    elapsed_ms: int
    model_digest: str
    warnings: tuple[str, ...] = ()


def segment_audio(buf: AudioBuffer, cfg: PipelineConfig) -> list[Segment]:
    """Consecutive non-overlapping windows of segment_len_s; the trailing
    remainder is dropped. Raises TooShort below min_segments."""
    seg_len = int(round(cfg.segment_len_s * buf.sample_rate_hz))
    n = len(buf) // seg_len
    if n < cfg.min_segments:
        raise TooShort(
            f"{len(buf) / buf.sample_rate_hz:.2f} s of audio yields {n} segments "
            f"of {cfg.segment_len_s} s; need at least {cfg.min_segments}")
    rate = buf.sample_rate_hz
    return [
        Segment(samples=buf.samples[i * seg_len:(i + 1) * seg_len],
                start_s=i * seg_len / rate,
                duration_s=seg_len / rate)
        for i in range(n)
    ]


def segment_feature_vector(seg: Segment, cfg: PipelineConfig) -> np.ndarray:
    """Pool the segment's MFCC frames into one fixed-length vector:
    per-coefficient mean, then per-coefficient population std."""
    rate = cfg.feature_cfg.sample_rate_hz
    mfcc = extract_mfcc(AudioBuffer(seg.samples, rate), cfg.feature_cfg)
    return np.concatenate([mfcc.vectors.mean(axis=0), mfcc.vectors.std(axis=0)])


def classify_segment(model: svm.SvmModel, seg: Segment,
                     cfg: PipelineConfig) -> SegmentVerdict:
    if model.dim != cfg.feature_dim:
        raise DimensionMismatch(
            f"model expects dim {model.dim}, pipeline produces {cfg.feature_dim}")
    vec = segment_feature_vector(seg, cfg)
    f = svm.decision_value(model, vec)
    label = Label.ASPHYXIA if f >= 0 else Label.NORMAL
    return SegmentVerdict(label=label, decision_value=f, start_s=seg.start_s)


def majority_vote(verdicts: list[SegmentVerdict]) -> tuple[Label, float]:
    """Class with strictly more votes wins; an exact tie goes to asphyxia.
    Confidence is the winning fraction."""
    if not verdicts:
        raise EmptyVerdicts("cannot vote over zero verdicts")
    votes_a = sum(1 for v in verdicts if v.label is Label.ASPHYXIA)
    votes_n = len(verdicts) - votes_a
    verdict = Label.ASPHYXIA if votes_a >= votes_n else Label.NORMAL
    confidence = max(votes_a, votes_n) / len(verdicts)
    return verdict, confidence


def classify_trimmed(trimmed: AudioBuffer, model: svm.SvmModel,
                     cfg: PipelineConfig) -> tuple[list[SegmentVerdict], int]:
    """Segment already-trimmed audio and classify each segment.

    Interior segments with no sample above the trim threshold carry no cry
    evidence; they are skipped and counted. If every segment is skipped
    the recording is treated as silent.
    """
    segments = segment_audio(trimmed, cfg)
    verdicts: list[SegmentVerdict] = []
    skipped = 0
    for seg in segments:
        try:
            verdicts.append(classify_segment(model, seg, cfg))
        except (EmptyAfterTrim, InputTooShort):
            skipped += 1
    if not verdicts:
        raise EmptyAfterTrim("no segment contains audio above the silence threshold")
    return verdicts, skipped


def diagnose(buf: AudioBuffer, model: svm.SvmModel, cfg: PipelineConfig,
             model_digest: str = "") -> Diagnosis:
    """Full path over one decoded recording.

    Input at a non-canonical rate is resampled (with a warning).
    Deterministic apart from elapsed_ms.
    """
    t0 = time.perf_counter()
    warnings: list[str] = []
    rate = cfg.feature_cfg.sample_rate_hz
    if buf.sample_rate_hz != rate:
        warnings.append(f"input resampled from {buf.sample_rate_hz} Hz to {rate} Hz")
        buf = resample_linear(buf, rate)

    trimmed = dsp.trim_silence(buf, cfg.feature_cfg.trim_threshold)
    verdicts, skipped = classify_trimmed(trimmed, model, cfg)
    if skipped:
        warnings.append(f"{skipped} quiet segment(s) skipped")
    if not model.training_meta.converged:
        warnings.append("model training did not fully converge")

    verdict, confidence = majority_vote(verdicts)
    votes_a = sum(1 for v in verdicts if v.label is Label.ASPHYXIA)
    elapsed_ms = int(round((time.perf_counter() - t0) * 1000.0))
    return Diagnosis(
        verdict=verdict,
        segment_verdicts=tuple(verdicts),
        votes_asphyxia=votes_a,
        votes_normal=len(verdicts) - votes_a,
        confidence=confidence,
        elapsed_ms=elapsed_ms,
        model_digest=model_digest,
        warnings=tuple(warnings),
    )


def diagnosis_to_response(d: Diagnosis) -> dict:
    """The JSON shape shared verbatim by the CLI and the HTTP service."""
    return {
        "verdict": d.verdict.text,
        "confidence": d.confidence,
        "segments": [
            {"start_s": v.start_s, "label": v.label.text,
             "decision_value": v.decision_value}
            for v in d.segment_verdicts
        ],
        "elapsed_ms": d.elapsed_ms,
        "model_digest": d.model_digest,
        "warnings": list(d.warnings),
    }
