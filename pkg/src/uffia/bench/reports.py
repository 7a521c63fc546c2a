"""Run artifacts: metrics.csv, sweep.csv, run.json."""
from __future__ import annotations

import csv
import json
import platform
import sys
from pathlib import Path

import numpy as np

from .. import __version__


def environment_fingerprint(threads: int | None = None) -> dict:
    return {
        "package_version": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
        "threads": threads,
    }


def write_metrics_csv(path, epoch_rows, final_test_accuracy=None) -> None:
    """Rows: (epoch, split, loss, accuracy); train rows carry loss, val/test
    rows carry accuracy."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "split", "loss", "accuracy"])
        for row in epoch_rows:
            writer.writerow([row["epoch"], "train", f"{row['train_loss']:.6f}", ""])
            writer.writerow([row["epoch"], "val", "", f"{row['val_accuracy']:.6f}"])
        if final_test_accuracy is not None:
            last = epoch_rows[-1]["epoch"] if epoch_rows else 0
            writer.writerow([last, "test", "", f"{final_test_accuracy:.6f}"])


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["snr_db", "accuracy"])
        for snr, acc in rows:
            writer.writerow([f"{snr:g}", f"{acc:.6f}"])


def write_run_json(path, config_dict: dict, extra: dict | None = None,
                   threads: int | None = None) -> None:
    doc = {"config": config_dict,
           "environment": environment_fingerprint(threads)}
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
