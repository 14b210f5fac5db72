#!/usr/bin/env python3
"""Desk-scale end-to-end experiment: synth -> train -> eval -> report.

Runs the full pipeline through the CLI with a pinned seed and prints the
headline numbers (loss trajectory, test accuracy, output-SNR gain at 0 dB
input). Everything lands under runs/desk-scale/ by default.
"""

from __future__ import annotations

import argparse
import csv
import subprocess
import sys
import time
from pathlib import Path


def run(cmd: list[str]) -> float:
    print(f"$ {' '.join(cmd)}", flush=True)
    t0 = time.monotonic()
    subprocess.run(cmd, check=True)
    dt = time.monotonic() - t0
    print(f"  [{dt:.1f}s]", flush=True)
    return dt


def read_rows(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="runs/desk-scale")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int, default=20)
    ap.add_argument("--skip-synth", action="store_true", help="reuse an existing data.fdcd")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = out / "data.fdcd"
    cli = [sys.executable, "-m", "fdcnet.cli"]

    total = 0.0
    if not (args.skip_synth and data.exists()):
        total += run(cli + [
            "synth", "--subjects", "4", "--trials", "25", "--channels", "8",
            "--label-effect", "0.5", "--seed", str(args.seed), "--out", str(data),
        ])
    total += run(cli + [
        "train", "--data", str(data), "--out-dir", str(out), "--desk",
        "--epochs", str(args.epochs), "--seed", str(args.seed),
    ])
    total += run(cli + [
        "eval", "--model", str(out / "model.fdcn"), "--data", str(data),
        "--use", "test", "--seed", str(args.seed),
        "--out", str(out / "eval_test.csv"),
    ])
    total += run(cli + ["report", "--out-dir", str(out / "report"), str(out / "eval_test.csv")])

    log = read_rows(out / "training_log.csv")
    ev = read_rows(out / "eval_test.csv")
    first, last = float(log[0]["loss_total"]), float(log[-1]["loss_total"])
    at0 = next(r for r in ev if abs(float(r["target_snr_db"])) < 1e-9)
    gain = float(at0["output_snr_db"]) - float(at0["input_snr_db"])

    print()
    print(f"train loss: {first:.4f} -> {last:.4f} ({'down' if last < first else 'UP'})")
    print(f"final val acc: {float(log[-1]['val_acc']):.4f}  val cc: {float(log[-1]['val_cc']):.4f}")
    print(f"test acc (eval grid mean): {float(ev[-1]['acc_4class']):.4f}")
    print(f"acc at 0 dB: {float(at0['acc_4class']):.4f}")
    print(f"SNR gain at 0 dB input: {gain:+.3f} dB "
          f"({float(at0['input_snr_db']):.3f} -> {float(at0['output_snr_db']):.3f})")
    print(f"total pipeline time: {total:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
