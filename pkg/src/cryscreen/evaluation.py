"""Corpus loading, subject-disjoint splits, training orchestration,
screening metrics, cross-validation and the robustness sweeps.

Protocol notes. Splits and folds are by SUBJECT, never by recording or
segment: an infant contributing audio to both sides of a split would leak
identity. Metrics are recording-level (one majority-vote prediction per
recording). Ratios with a zero denominator are reported as None, never
silently as zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import model_store, svm
from .audio_io import AudioBuffer, load_wav
from .dsp import trim_silence
from .errors import (
    BadManifestRow,
    DuplicatePath,
    EmptyAfterTrim,
    EmptyPredictions,
    InputTooShort,
    MissingClassDir,
    MixedLabelSubject,
    TooFewSubjects,
)
from .features import add_noise
from .labels import Label
from .pipeline import (
    PipelineConfig,
    classify_trimmed,
    diagnose,
    majority_vote,
    segment_audio,
    segment_feature_vector,
)


@dataclass(frozen=True)
class CorpusEntry:
    path: Path
    label: Label
    subject_id: str


@dataclass(frozen=True)
class SplitPlan:
    train_subjects: frozenset[str]
    test_subjects: frozenset[str]
    fraction: float
    seed: int


@dataclass
class EvalReport:
    """Confusion counts and screening ratios; asphyxia is positive."""

    tp: int
    fp: int
    tn: int
    fn: int
    sensitivity: float | None
    specificity: float | None
    accuracy: float
    n_train: int = 0
    n_test: int = 0
    model_digest: str = ""
    feature_digest: str = ""
    synthetic: bool = True

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "sensitivity": self.sensitivity, "specificity": self.specificity,
            "accuracy": self.accuracy, "n_train": self.n_train,
            "n_test": self.n_test, "model_digest": self.model_digest,
            "feature_digest": self.feature_digest, "synthetic": self.synthetic,
        }


def load_corpus(root) -> list[CorpusEntry]:
    """Read a labeled corpus from `manifest.csv` (preferred when present)
    or from `normal/` and `asphyxia/` directories of WAV files.

    Directory mode derives subject_id from the filename prefix before the
    first double underscore; a file without one is its own subject.
    """
    root = Path(root)
    manifest = root / "manifest.csv"
    entries = (_load_manifest(root, manifest) if manifest.exists()
               else _load_directories(root))
    _reject_mixed_subjects(entries)
    return entries


def _load_manifest(root: Path, manifest: Path) -> list[CorpusEntry]:
    entries: list[CorpusEntry] = []
    seen: set[str] = set()
    with open(manifest, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"path", "label", "subject_id"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise BadManifestRow(0, f"header must contain columns {sorted(required)}")
        for i, row in enumerate(reader, start=1):
            rel = (row.get("path") or "").strip()
            if not rel:
                raise BadManifestRow(i, "empty path")
            try:
                label = Label.from_text(row.get("label") or "")
            except ValueError as exc:
                raise BadManifestRow(i, str(exc)) from exc
            subject = (row.get("subject_id") or "").strip()
            if not subject:
                raise BadManifestRow(i, "empty subject_id")
            if rel in seen:
                raise DuplicatePath(f"path listed twice in manifest: {rel}")
            seen.add(rel)
            p = Path(rel)
            entries.append(CorpusEntry(path=p if p.is_absolute() else root / p,
                                       label=label, subject_id=subject))
    return entries


def _load_directories(root: Path) -> list[CorpusEntry]:
    entries: list[CorpusEntry] = []
    for label in (Label.NORMAL, Label.ASPHYXIA):
        class_dir = root / label.text
        if not class_dir.is_dir():
            raise MissingClassDir(f"expected directory {class_dir}")
        for p in sorted(class_dir.glob("*.wav")):
            subject = p.stem.split("__", 1)[0]
            entries.append(CorpusEntry(path=p, label=label, subject_id=subject))
    return entries


def _reject_mixed_subjects(entries: list[CorpusEntry]) -> None:
    by_subject: dict[str, Label] = {}
    for e in entries:
        prev = by_subject.setdefault(e.subject_id, e.label)
        if prev is not e.label:
            raise MixedLabelSubject(
                f"subject {e.subject_id!r} has recordings under both classes")


def split_by_subject(entries: list[CorpusEntry], fraction: float,
                     seed: int) -> SplitPlan:
    """Shuffle subjects per class with the seed and send the first
    ~fraction of each class to the train side. Subject-disjoint by
    construction; both classes end up on both sides."""
    if not (0 < fraction < 1):
        raise ValueError("fraction must be in (0, 1)")
    per_class = _subjects_per_class(entries)
    for label, subjects in per_class.items():
        if len(subjects) < 2:
            raise TooFewSubjects(
                f"class {label.text} has {len(subjects)} subject(s); need >= 2")
    rng = np.random.default_rng(seed)
    train: set[str] = set()
    test: set[str] = set()
    for label in (Label.NORMAL, Label.ASPHYXIA):
        subjects = sorted(per_class[label])
        order = [subjects[i] for i in rng.permutation(len(subjects))]
        n_train = min(max(int(round(fraction * len(order))), 1), len(order) - 1)
        train.update(order[:n_train])
        test.update(order[n_train:])
    return SplitPlan(train_subjects=frozenset(train), test_subjects=frozenset(test),
                     fraction=fraction, seed=seed)


def _subjects_per_class(entries: list[CorpusEntry]) -> dict[Label, set[str]]:
    per_class: dict[Label, set[str]] = {Label.NORMAL: set(), Label.ASPHYXIA: set()}
    for e in entries:
        per_class[e.label].add(e.subject_id)
    return per_class


def confusion_metrics(predictions: list[tuple[Label, Label]]) -> EvalReport:
    """Counts and ratios from (true, predicted) pairs."""
    if not predictions:
        raise EmptyPredictions("no predictions to score")
    tp = fp = tn = fn = 0
    for truth, pred in predictions:
        if truth is Label.ASPHYXIA:
            tp, fn = (tp + 1, fn) if pred is Label.ASPHYXIA else (tp, fn + 1)
        else:
            tn, fp = (tn + 1, fp) if pred is Label.NORMAL else (tn, fp + 1)
    sens = tp / (tp + fn) if (tp + fn) else None
    spec = tn / (tn + fp) if (tn + fp) else None
    acc = (tp + tn) / len(predictions)
    return EvalReport(tp=tp, fp=fp, tn=tn, fn=fn, sensitivity=sens,
                      specificity=spec, accuracy=acc, n_test=len(predictions))


def recording_segment_vectors(buf: AudioBuffer,
                              cfg: PipelineConfig) -> np.ndarray:
    """Pooled feature vectors for every usable segment of one recording.

    Mirrors the diagnose path: quiet segments are skipped; a recording
    with no usable segment raises EmptyAfterTrim.
    """
    trimmed = trim_silence(buf, cfg.feature_cfg.trim_threshold)
    vectors = []
    for seg in segment_audio(trimmed, cfg):
        try:
            vectors.append(segment_feature_vector(seg, cfg))
        except (EmptyAfterTrim, InputTooShort):
            continue
    if not vectors:
        raise EmptyAfterTrim("no usable segment in recording")
    return np.stack(vectors)


def train_and_evaluate(corpus: list[CorpusEntry], pipeline_cfg: PipelineConfig,
                       train_cfg: svm.TrainConfig, split: SplitPlan,
                       kernel: svm.KernelSpec | None = None,
                       ) -> tuple[svm.SvmModel, EvalReport]:
    """Fit on the train side of the split, score recording-level on the
    test side via the full diagnose path. The standardizer is fit on
    training segments only."""
    train_entries = [e for e in corpus if e.subject_id in split.train_subjects]
    test_entries = [e for e in corpus if e.subject_id in split.test_subjects]
    rate = pipeline_cfg.feature_cfg.sample_rate_hz

    x_rows, y = [], []
    for e in train_entries:
        vecs = recording_segment_vectors(load_wav(e.path, rate), pipeline_cfg)
        x_rows.append(vecs)
        y.extend([float(e.label)] * len(vecs))
    x_matrix = np.concatenate(x_rows)
    if kernel is None:
        kernel = svm.KernelSpec.default_for_dim(x_matrix.shape[1])
    scaler = svm.standardize_fit(x_matrix)
    model = svm.smo_train(svm.standardize_apply(scaler, x_matrix),
                          np.asarray(y), kernel, train_cfg, standardizer=scaler)

    digest = model_store.model_digest(model, pipeline_cfg)
    pairs = []
    for e in test_entries:
        d = diagnose(load_wav(e.path, rate), model, pipeline_cfg,
                     model_digest=model_store.short_digest(digest))
        pairs.append((e.label, d.verdict))
    report = confusion_metrics(pairs)
    report.n_train = len(train_entries)
    report.model_digest = model_store.short_digest(digest)
    report.feature_digest = pipeline_cfg.feature_cfg.digest()
    return model, report


def _vote_from_values(values: np.ndarray) -> Label:
    votes_a = int(np.count_nonzero(values >= 0))
    return Label.ASPHYXIA if votes_a >= len(values) - votes_a else Label.NORMAL


def kfold_cv(corpus: list[CorpusEntry], k: int,
             grid: list[tuple[svm.KernelSpec, svm.TrainConfig]], seed: int,
             pipeline_cfg: PipelineConfig,
             ) -> tuple[svm.KernelSpec, svm.TrainConfig, list[dict]]:
    """Exhaustive grid evaluation over subject-disjoint folds.

    Returns the winning cell plus the full table (mean recording-level
    accuracy per cell, deterministic cell order). Accuracy ties break
    toward the simplest model: lower C, then lower gamma.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if not grid:
        raise ValueError("grid must be non-empty")
    per_class = _subjects_per_class(corpus)
    for label, subjects in per_class.items():
        if len(subjects) < 2:
            raise TooFewSubjects(f"class {label.text} has fewer than 2 subjects")
    all_subjects = sorted({e.subject_id for e in corpus})
    if k > len(all_subjects):
        raise TooFewSubjects(f"k={k} exceeds {len(all_subjects)} subjects")

    # Stratified fold assignment: per-class shuffle, dealt cyclically.
    rng = np.random.default_rng(seed)
    fold_of: dict[str, int] = {}
    counter = 0
    for label in (Label.NORMAL, Label.ASPHYXIA):
        subjects = sorted(per_class[label])
        for i in rng.permutation(len(subjects)):
            fold_of[subjects[i]] = counter % k
            counter += 1

    features = {e.path: None for e in corpus}
    rate = pipeline_cfg.feature_cfg.sample_rate_hz
    for e in corpus:
        features[e.path] = recording_segment_vectors(load_wav(e.path, rate),
                                                     pipeline_cfg)

    table = []
    for cell_index, (kernel, train_cfg) in enumerate(grid):
        fold_acc = []
        for fold in range(k):
            train_e = [e for e in corpus if fold_of[e.subject_id] != fold]
            test_e = [e for e in corpus if fold_of[e.subject_id] == fold]
            if not test_e:
                continue
            x = np.concatenate([features[e.path] for e in train_e])
            y = np.concatenate([[float(e.label)] * len(features[e.path])
                                for e in train_e])
            scaler = svm.standardize_fit(x)
            model = svm.smo_train(svm.standardize_apply(scaler, x), y,
                                  kernel, train_cfg, standardizer=scaler)
            correct = sum(
                1 for e in test_e
                if _vote_from_values(svm.decision_values(model, features[e.path]))
                is e.label)
            fold_acc.append(correct / len(test_e))
        table.append({
            "cell": cell_index,
            "kernel": kernel,
            "train_cfg": train_cfg,
            "mean_accuracy": float(np.mean(fold_acc)),
            "fold_accuracies": fold_acc,
        })

    def simplicity(row):
        gamma = row["kernel"].gamma if row["kernel"].kind == "rbf" else 0.0
        return (-row["mean_accuracy"], row["train_cfg"].C, gamma, row["cell"])

    best = min(table, key=simplicity)
    return best["kernel"], best["train_cfg"], table


def record_length_sweep(entries: list[CorpusEntry], model: svm.SvmModel,
                        pipeline_cfg: PipelineConfig, lengths_s: list[float],
                        model_digest: str = "") -> list[dict]:
    """Evaluate with every test recording truncated to each length.

    Truncation applies to the trimmed cry audio (a raw-byte cut would let
    leading silence eat into the kept window); the rest of the path is the
    diagnose path. Recordings shorter than a requested length are used
    whole; the row records how many were. Rows come back in the given
    (ascending) order.
    """
    if any(b <= a for a, b in zip(lengths_s, lengths_s[1:])):
        raise ValueError("lengths_s must be strictly ascending")
    if lengths_s and lengths_s[0] < pipeline_cfg.segment_len_s:
        raise ValueError("lengths must be >= the segment length")
    rate = pipeline_cfg.feature_cfg.sample_rate_hz
    threshold = pipeline_cfg.feature_cfg.trim_threshold
    buffers = [(e, trim_silence(load_wav(e.path, rate), threshold))
               for e in entries]
    rows = []
    for length in lengths_s:
        n_samples = int(round(length * rate))
        pairs, n_short = [], 0
        for e, buf in buffers:
            if len(buf) <= n_samples:
                n_short += 1
                cut = buf
            else:
                cut = AudioBuffer(buf.samples[:n_samples], rate)
            verdicts, _ = classify_trimmed(cut, model, pipeline_cfg)
            verdict, _conf = majority_vote(verdicts)
            pairs.append((e.label, verdict))
        report = confusion_metrics(pairs)
        report.model_digest = model_digest
        report.feature_digest = pipeline_cfg.feature_cfg.digest()
        rows.append({"length_s": length, "report": report, "n_short": n_short})
    return rows


def noise_robustness_eval(entries: list[CorpusEntry], model: svm.SvmModel,
                          pipeline_cfg: PipelineConfig,
                          snr_list_db: list[float], seed: int,
                          model_digest: str = "") -> list[dict]:
    """Evaluate under additive white noise at each SNR.

    The clean (infinite SNR) row always comes first. Deterministic per
    seed: each (row, recording) pair gets its own derived noise seed.
    """
    snrs = [math.inf] + [s for s in snr_list_db if not math.isinf(s)]
    rate = pipeline_cfg.feature_cfg.sample_rate_hz
    buffers = [(e, load_wav(e.path, rate)) for e in entries]
    rows = []
    for row_idx, snr in enumerate(snrs):
        pairs = []
        for ent_idx, (e, buf) in enumerate(buffers):
            child = int(np.random.SeedSequence(
                entropy=seed, spawn_key=(row_idx, ent_idx)).generate_state(1)[0])
            noisy = add_noise(buf, snr, seed=child)
            d = diagnose(noisy, model, pipeline_cfg, model_digest=model_digest)
            pairs.append((e.label, d.verdict))
        report = confusion_metrics(pairs)
        report.model_digest = model_digest
        report.feature_digest = pipeline_cfg.feature_cfg.digest()
        rows.append({"snr_db": snr, "report": report})
    return rows


# --- text rendering -----------------------------------------------------------


def _ratio(x: float | None) -> str:
    return "n/a" if x is None else f"{x:.3f}"


def format_report(report: EvalReport) -> str:
    head = "synthetic-corpus evaluation" if report.synthetic else "evaluation"
    lines = [
        f"# {head} (asphyxia = positive)",
        f"{'':12}{'pred asphyxia':>15}{'pred normal':>13}",
        f"{'asphyxia':12}{report.tp:>15}{report.fn:>13}",
        f"{'normal':12}{report.fp:>15}{report.tn:>13}",
        f"sensitivity {_ratio(report.sensitivity)}  "
        f"specificity {_ratio(report.specificity)}  "
        f"accuracy {report.accuracy:.3f}",
        f"n_train {report.n_train}  n_test {report.n_test}  "
        f"model {report.model_digest or '-'}  features {report.feature_digest or '-'}",
    ]
    return "\n".join(lines)


def format_sweep_table(rows: list[dict], key: str, heading: str) -> str:
    lines = [f"# {heading}",
             f"{key:>12}{'sens':>8}{'spec':>8}{'acc':>8}{'extra':>10}"]
    for row in rows:
        r = row["report"]
        extra = f"short={row['n_short']}" if "n_short" in row else ""
        val = row[key]
        val_text = "inf" if isinstance(val, float) and math.isinf(val) else f"{val:g}"
        lines.append(f"{val_text:>12}{_ratio(r.sensitivity):>8}"
                     f"{_ratio(r.specificity):>8}{r.accuracy:>8.3f}{extra:>10}")
    return "\n".join(lines)
