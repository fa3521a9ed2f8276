"""Synthetic two-class cry corpus.

Restricted clinical recordings cannot ship with a test harness, so the
evaluation pipeline runs against generated stand-ins: harmonic stacks with
a class-dependent fundamental (normal around 450 Hz, asphyxia around
650 Hz), a per-subject fundamental offset, amplitude-modulated bursts with
silence gaps, and background noise at 20 dB SNR. Every report produced
from this corpus is labeled synthetic; no clinical validity is claimed.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer, write_wav
from .errors import IoFailure
from .features import add_noise
from .labels import Label

RATE_HZ = 16000
_CLASS_F0 = {Label.NORMAL: 450.0, Label.ASPHYXIA: 650.0}
_SUBJECT_F0_SPREAD = 30.0
_BURST_F0_JITTER = 10.0
_NOISE_SNR_DB = 20.0
_N_HARMONICS = 6
_MIN_VOICED_S = 4.2


def _burst(rng: np.random.Generator, f0: float) -> np.ndarray:
    length_s = rng.uniform(0.45, 0.75)
    n = int(length_s * RATE_HZ)
    t = np.arange(n) / RATE_HZ
    f_burst = f0 + rng.uniform(-_BURST_F0_JITTER, _BURST_F0_JITTER)
    wave = np.zeros(n)
    for h in range(1, _N_HARMONICS + 1):
        phase = rng.uniform(0, 2 * np.pi)
        wave += np.sin(2 * np.pi * h * f_burst * t + phase) / h
    # raised-cosine attack and release so bursts do not click
    attack = int(0.06 * RATE_HZ)
    release = int(0.10 * RATE_HZ)
    env = np.ones(n)
    env[:attack] = 0.5 * (1 - np.cos(np.pi * np.arange(attack) / attack))
    env[n - release:] = 0.5 * (1 + np.cos(np.pi * np.arange(release) / release))
    return wave * env


def _recording(rng: np.random.Generator, f0: float) -> np.ndarray:
    pieces = [np.zeros(int(rng.uniform(0.10, 0.30) * RATE_HZ))]
    voiced = 0.0
    while voiced < _MIN_VOICED_S:
        burst = _burst(rng, f0)
        voiced += len(burst) / RATE_HZ
        pieces.append(burst)
        pieces.append(np.zeros(int(rng.uniform(0.15, 0.30) * RATE_HZ)))
    pieces.append(np.zeros(int(rng.uniform(0.10, 0.30) * RATE_HZ)))
    x = np.concatenate(pieces)
    peak = rng.uniform(0.35, 0.60)
    return x * (peak / np.max(np.abs(x)))


def generate_synthetic_corpus(out_dir, n_subjects_per_class: int,
                              recordings_per_subject: int, seed: int) -> Path:
    """Write the corpus plus manifest.csv; returns the manifest path.

    Fully deterministic per seed: the same call produces byte-identical
    files, so generated corpora can be used as frozen fixtures.
    """
    out = Path(out_dir)
    rng = np.random.default_rng(seed)
    rows = []
    try:
        for label, prefix in ((Label.NORMAL, "n"), (Label.ASPHYXIA, "a")):
            class_dir = out / label.text
            class_dir.mkdir(parents=True, exist_ok=True)
            for s in range(n_subjects_per_class):
                subject = f"{prefix}{s:02d}"
                f0 = _CLASS_F0[label] + rng.uniform(-_SUBJECT_F0_SPREAD,
                                                    _SUBJECT_F0_SPREAD)
                for r in range(recordings_per_subject):
                    clean = _recording(rng, f0)
                    noise_seed = int(rng.integers(0, 2 ** 31 - 1))
                    noisy = add_noise(AudioBuffer(clean, RATE_HZ),
                                      _NOISE_SNR_DB, noise_seed)
                    rel = f"{label.text}/{subject}__r{r}.wav"
                    write_wav(out / rel, noisy.samples, RATE_HZ)
                    rows.append((rel, label.text, subject))
        manifest = out / "manifest.csv"
        with open(manifest, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["path", "label", "subject_id"])
            writer.writerows(rows)
    except OSError as exc:
        raise IoFailure(f"cannot write corpus under {out}: {exc}") from exc
    return manifest
