#!/usr/bin/env python3
"""Robustness studies on a trained model: how short can a recording be,
and how much background noise the verdicts tolerate.

    python3 scripts/run_robustness_sweeps.py --model /tmp/cry_exp/model.ubw \
        --data /tmp/cry_exp/corpus --lengths 1,2,3,4 --snr 30,20,10,0,-10
"""

import argparse
from pathlib import Path

from cryscreen import evaluation, model_store


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model", type=Path, required=True)
    ap.add_argument("--data", type=Path, required=True)
    ap.add_argument("--lengths", default="1,2,3,4",
                    help="record lengths in seconds, ascending")
    ap.add_argument("--snr", default="30,20,10,0,-10",
                    help="noise levels in dB SNR")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    model, cfg, digest = model_store.load_model(args.model)
    short = model_store.short_digest(digest)
    entries = evaluation.load_corpus(args.data)
    print(f"model {short}, {len(entries)} recordings\n")

    lengths = [float(x) for x in args.lengths.split(",")]
    rows = evaluation.record_length_sweep(entries, model, cfg, lengths, short)
    print(evaluation.format_sweep_table(rows, "length_s", "record-length sweep"))

    snrs = [float(x) for x in args.snr.split(",")]
    rows = evaluation.noise_robustness_eval(entries, model, cfg, snrs,
                                            args.seed, short)
    print()
    print(evaluation.format_sweep_table(rows, "snr_db", "noise robustness"))


if __name__ == "__main__":
    main()
