"""Command-line workflow: synth, train, evaluate, diagnose, extract, serve.

Exit codes (documented contract; the verdict itself never affects the
exit code):

    0  success
    2  input problems: bad/missing audio or corpus, IO failures, usage
    3  too few subjects for the requested split or folds
    4  configuration problems: unknown key, bad value, invariant violation
    5  model file problems: bad magic, version, digest, truncation
    6  no cry detected (silent or too-short recording)
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import errors as err
from . import evaluation, model_store, svm
from .audio_io import load_wav
from .features import FeatureConfig, extract_mfcc
from .pipeline import PipelineConfig, diagnose, diagnosis_to_response
from .synth import generate_synthetic_corpus

_EXIT_CODES = {
    err.MalformedHeader: 2, err.UnsupportedEncoding: 2, err.EmptyData: 2,
    err.LengthMismatch: 2, err.MissingClassDir: 2, err.BadManifestRow: 2,
    err.DuplicatePath: 2, err.MixedLabelSubject: 2, err.IoFailure: 2,
    err.TooFewSubjects: 3,
    err.UnknownConfigKey: 4, err.InvalidConfigValue: 4,
    err.BadMagic: 5, err.UnsupportedVersion: 5, err.DigestMismatch: 5,
    err.Truncated: 5,
    err.EmptyAfterTrim: 6, err.TooShort: 6, err.InputTooShort: 6,
}

_NO_CRY_CODES = (err.EmptyAfterTrim, err.TooShort, err.InputTooShort)


def exit_code_for(exc: err.CryscreenError) -> int:
    for klass, code in _EXIT_CODES.items():
        if isinstance(exc, klass):
            return code
    return 1


# --- config files -------------------------------------------------------------

_FEATURE_KEYS = {
    "sample_rate_hz": int, "frame_len_ms": float, "hop_len_ms": float,
    "pre_emphasis_alpha": float, "n_mel_filters": int, "n_mfcc": int,
    "fmin_hz": float, "fmax_hz": float, "log_floor": float,
    "trim_threshold": float,
}
_PIPELINE_KEYS = {"segment_len_s": float, "min_segments": int, "pooling": str}
_TRAIN_KEYS = {"C": float, "tolerance": float, "max_passes": int, "seed": int}
_KERNEL_KEYS = {"kernel": str, "gamma": float}
_ALL_KEYS = {**_FEATURE_KEYS, **_PIPELINE_KEYS, **_TRAIN_KEYS, **_KERNEL_KEYS}


def parse_config_file(path) -> dict:
    """Plain `key = value` lines; '#' starts a comment; keys mirror the
    feature/pipeline/train config field names plus kernel and gamma."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise err.InvalidConfigValue(
                    f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, text = (p.strip() for p in line.partition("="))
            if key not in _ALL_KEYS:
                raise err.UnknownConfigKey(key)
            try:
                values[key] = _ALL_KEYS[key](text)
            except ValueError as exc:
                raise err.InvalidConfigValue(
                    f"{path}:{lineno}: bad value for {key}: {text!r}") from exc
    return values


def build_configs(values: dict, seed_override: int | None = None
                  ) -> tuple[PipelineConfig, svm.TrainConfig, svm.KernelSpec | None, bool]:
    """Assemble typed configs from parsed key/value pairs.

    Returns (pipeline_cfg, train_cfg, kernel_or_None, pinned) where pinned
    means the file fixed hyperparameters and cross-validation is skipped.
    """
    try:
        feature = FeatureConfig(**{k: values[k] for k in _FEATURE_KEYS if k in values})
        pipeline = PipelineConfig(
            feature_cfg=feature,
            **{k: values[k] for k in _PIPELINE_KEYS if k in values})
        train_kwargs = {k: values[k] for k in _TRAIN_KEYS if k in values}
        if seed_override is not None:
            train_kwargs["seed"] = seed_override
        train = svm.TrainConfig(**train_kwargs)
        pinned = any(k in values for k in ("kernel", "gamma", "C"))
        kernel = None
        if pinned:
            kind = values.get("kernel", "rbf")
            gamma = values.get("gamma")
            if kind == "rbf" and gamma is None:
                gamma = 1.0 / pipeline.feature_dim
            kernel = svm.KernelSpec(kind=kind,
                                    gamma=gamma if kind == "rbf" else None)
    except ValueError as exc:
        raise err.InvalidConfigValue(str(exc)) from exc
    return pipeline, train, kernel, pinned


def default_grid(dim: int, seed: int) -> list[tuple[svm.KernelSpec, svm.TrainConfig]]:
    cells = []
    for gamma in (1.0 / dim, 0.1):
        for c in (1.0, 10.0):
            cells.append((svm.KernelSpec(kind="rbf", gamma=gamma),
                          svm.TrainConfig(C=c, seed=seed)))
    return cells


# --- subcommands ---------------------------------------------------------------


def _cmd_synth(args) -> int:
    manifest = generate_synthetic_corpus(args.out, args.subjects,
                                         args.per_subject, args.seed)
    print(manifest)
    return 0


def _cmd_train(args) -> int:
    values = parse_config_file(args.config) if args.config else {}
    pipeline_cfg, train_cfg, kernel, pinned = build_configs(values, args.seed)
    entries = evaluation.load_corpus(args.data)
    split = evaluation.split_by_subject(entries, 0.8, train_cfg.seed)

    if not pinned:
        train_entries = [e for e in entries if e.subject_id in split.train_subjects]
        per_class = {}
        for e in train_entries:
            per_class.setdefault(e.label, set()).add(e.subject_id)
        subjects = {s for group in per_class.values() for s in group}
        if len(subjects) >= 2 and all(len(g) >= 2 for g in per_class.values()):
            k = min(3, len(subjects))
            grid = default_grid(pipeline_cfg.feature_dim, train_cfg.seed)
            kernel, train_cfg, table = evaluation.kfold_cv(
                train_entries, k, grid, train_cfg.seed, pipeline_cfg)
            print(f"# cross-validation ({k} folds, train side only)")
            for row in table:
                kern = row["kernel"]
                print(f"  {kern.kind} gamma={kern.gamma:g} C={row['train_cfg'].C:g}"
                      f" -> mean accuracy {row['mean_accuracy']:.3f}")
        else:
            print("corpus too small for cross-validation; using defaults",
                  file=sys.stderr)

    model, report = evaluation.train_and_evaluate(
        entries, pipeline_cfg, train_cfg, split, kernel)
    digest = model_store.save_model(model, pipeline_cfg, args.out)
    print(evaluation.format_report(report))
    if not model.training_meta.converged:
        print("warning: training did not fully converge "
              f"({model.training_meta.kkt_violations} KKT violations)",
              file=sys.stderr)
    print(f"model written to {args.out} "
          f"(digest {model_store.short_digest(digest)})")
    return 0


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise err.InvalidConfigValue(f"bad number list: {text!r}") from exc


def _evaluate_plain(entries, model, cfg, digest_short):
    rate = cfg.feature_cfg.sample_rate_hz
    pairs = []
    for e in entries:
        d = diagnose(load_wav(e.path, rate), model, cfg, model_digest=digest_short)
        pairs.append((e.label, d.verdict))
    report = evaluation.confusion_metrics(pairs)
    report.model_digest = digest_short
    report.feature_digest = cfg.feature_cfg.digest()
    return report


def _cmd_evaluate(args) -> int:
    model, cfg, digest = model_store.load_model(args.model)
    short = model_store.short_digest(digest)
    entries = evaluation.load_corpus(args.data)
    report = _evaluate_plain(entries, model, cfg, short)

    length_rows = noise_rows = None
    if args.sweep_lengths:
        lengths = _parse_float_list(args.sweep_lengths)
        length_rows = evaluation.record_length_sweep(entries, model, cfg,
                                                     lengths, short)
    if args.snr:
        snrs = _parse_float_list(args.snr)
        noise_rows = evaluation.noise_robustness_eval(entries, model, cfg,
                                                      snrs, args.seed, short)

    if args.json:
        payload = {"report": report.to_dict()}
        if length_rows is not None:
            payload["length_sweep"] = [
                {"length_s": r["length_s"], "n_short": r["n_short"],
                 "report": r["report"].to_dict()} for r in length_rows]
        if noise_rows is not None:
            payload["noise_robustness"] = [
                {"snr_db": None if math.isinf(r["snr_db"]) else r["snr_db"],
                 "report": r["report"].to_dict()} for r in noise_rows]
        print(json.dumps(payload, indent=2))
    else:
        print(evaluation.format_report(report))
        if length_rows is not None:
            print(evaluation.format_sweep_table(length_rows, "length_s",
                                                "record-length sweep"))
        if noise_rows is not None:
            print(evaluation.format_sweep_table(noise_rows, "snr_db",
                                                "noise robustness"))
    return 0


def _cmd_diagnose(args) -> int:
    model, cfg, digest = model_store.load_model(args.model)
    buf = load_wav(args.wav)
    try:
        d = diagnose(buf, model, cfg,
                     model_digest=model_store.short_digest(digest))
    except _NO_CRY_CODES as exc:
        print(f"no cry detected: {exc}", file=sys.stderr)
        return 6
    if args.json:
        print(json.dumps(diagnosis_to_response(d), indent=2))
        return 0
    print(f"VERDICT: {d.verdict.text}")
    total = d.votes_asphyxia + d.votes_normal
    print(f"confidence: {d.confidence:.0%} "
          f"({max(d.votes_asphyxia, d.votes_normal)}/{total} segments)")
    for v in d.segment_verdicts:
        print(f"  {v.start_s:6.2f}s  {v.label.text:<9} f={v.decision_value:+.4f}")
    print(f"elapsed: {d.elapsed_ms} ms  model: {d.model_digest}")
    for w in d.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def _cmd_extract(args) -> int:
    _model, cfg, _digest = model_store.load_model(args.model_config)
    buf = load_wav(args.wav, cfg.feature_cfg.sample_rate_hz)
    try:
        mfcc = extract_mfcc(buf, cfg.feature_cfg)
    except _NO_CRY_CODES as exc:
        print(f"no cry detected: {exc}", file=sys.stderr)
        return 6
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"c{i}" for i in range(cfg.feature_cfg.n_mfcc)])
        writer.writerows(np.asarray(mfcc.vectors).tolist())
    print(f"{mfcc.n_frames} frames -> {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    model, cfg, digest = model_store.load_model(args.model)
    host, _, port_text = args.bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise err.InvalidConfigValue(f"--bind must be HOST:PORT, got {args.bind!r}")
    app = create_app(model, cfg, digest, ui_dir=args.ui_dir)
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cryscreen",
        description="Infant-cry screening: record-level normal/asphyxia verdicts")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--subjects", type=int, default=20)
    p.add_argument("--per-subject", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("train", help="train a model on a labeled corpus")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("evaluate", help="score a model against a labeled corpus")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--sweep-lengths", help="comma-separated seconds")
    p.add_argument("--snr", help="comma-separated SNR dB values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("diagnose", help="diagnose one WAV recording")
    p.add_argument("--model", required=True)
    p.add_argument("wav")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_diagnose)

    p = sub.add_parser("extract", help="dump per-frame MFCCs to CSV")
    p.add_argument("--model-config", required=True, dest="model_config")
    p.add_argument("wav")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_extract)

    p = sub.add_parser("serve", help="run the HTTP inference service")
    p.add_argument("--model", required=True)
    p.add_argument("--bind", default="127.0.0.1:8000")
    p.add_argument("--ui-dir", default=None,
                   help="optionally serve a built web UI from this directory")
    p.set_defaults(fn=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except err.CryscreenError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except OSError as exc:
        print(f"error (io_failure): {exc}", file=sys.stderr)
        return 2


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
