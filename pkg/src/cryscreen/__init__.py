"""Infant-cry screening: MFCC features, an SMO-trained kernel SVM, and a
majority-vote diagnosis over fixed-length segments, with an evaluation
harness, binary model persistence, a CLI and an HTTP service."""

from .audio_io import AudioBuffer, WavInfo, load_wav, parse_wav, resample_linear, to_mono
from .features import FeatureConfig, MelFilterbank, MfccMatrix, add_noise, extract_mfcc
from .labels import Label
from .pipeline import (
    Diagnosis,
    PipelineConfig,
    Segment,
    SegmentVerdict,
    diagnose,
    diagnosis_to_response,
    majority_vote,
    segment_audio,
)
from .svm import KernelSpec, SvmModel, TrainConfig, predict, smo_train

__all__ = [
    "AudioBuffer", "WavInfo", "load_wav", "parse_wav", "resample_linear", "to_mono",
    "FeatureConfig", "MelFilterbank", "MfccMatrix", "add_noise", "extract_mfcc",
    "Label",
    "Diagnosis", "PipelineConfig", "Segment", "SegmentVerdict",
    "diagnose", "diagnosis_to_response", "majority_vote", "segment_audio",
    "KernelSpec", "SvmModel", "TrainConfig", "predict", "smo_train",
]

__version__ = "0.1.0"
