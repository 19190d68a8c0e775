"""Artifact writers: delimited tables and JSON reports, written atomically."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

__all__ = [
    "atomic_write_text",
    "write_json",
    "write_coeff_csv",
    "write_dimension_csv",
    "write_trend_csv",
    "write_track_csv",
    "write_periodogram_csv",
]


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _rows_to_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    with os.fdopen(fd, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)
    os.replace(tmp, path)


def write_coeff_csv(path, table: np.ndarray, target: np.ndarray) -> None:
    """Character tables as rows k,l,re,im,target_re,target_im,abs_dev."""
    K = (table.shape[0] - 1) // 2
    rows = []
    for k in range(-K, K + 1):
        for l in range(-K, K + 1):
            s = table[k + K, l + K]
            t = target[k + K, l + K]
            rows.append([k, l, f"{s.real:.12g}", f"{s.imag:.12g}",
                         f"{t.real:.12g}", f"{t.imag:.12g}", f"{abs(s - t):.12g}"])
    _rows_to_csv(path, ["k", "l", "re", "im", "target_re", "target_im", "abs_dev"], rows)


def write_dimension_csv(path, report) -> None:
    rows = [[f"{s:.12g}", f"{h:.12g}"] for s, h in zip(report.scales, report.entropies)]
    _rows_to_csv(path, ["scale", "entropy_nats"], rows)


def write_trend_csv(path, trend) -> None:
    _rows_to_csv(path, ["N", "max_deviation"],
                 [[n, f"{d:.12g}"] for n, d in trend])


def write_track_csv(path, times, values) -> None:
    _rows_to_csv(path, ["t", "value"],
                 [[f"{t:.12g}", f"{v:.12g}"] for t, v in zip(times, values)])


def write_periodogram_csv(path, per) -> None:
    _rows_to_csv(path, ["freq", "power"],
                 [[f"{f:.12g}", f"{p:.12g}"] for f, p in zip(per.freqs, per.power)])
