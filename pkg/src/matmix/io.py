"""Long-form CSV datasets, label files and atomic JSON output."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

HEADER = ["obs", "row", "col", "value"]


class DataFormatError(ValueError):
    pass


def _atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_dataset(path, tensor):
    tensor = np.asarray(tensor, dtype=float)
    lines = [",".join(HEADER)]
    n_obs, n, p = tensor.shape
    for i in range(n_obs):
        for r in range(n):
            for c in range(p):
                lines.append(f"{i},{r},{c},{_fmt(tensor[i, r, c])}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_dataset(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != HEADER:
            raise DataFormatError(f"{path}: expected header {','.join(HEADER)}")
        rows = []
        for k, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 4:
                raise DataFormatError(f"{path}:{k}: expected 4 fields")
            try:
                rows.append((int(rec[0]), int(rec[1]), int(rec[2]), float(rec[3])))
            except ValueError:
                raise DataFormatError(f"{path}:{k}: malformed record") from None
    if not rows:
        raise DataFormatError(f"{path}: no data")
    idx = np.array([r[:3] for r in rows], dtype=np.int64)
    vals = np.array([r[3] for r in rows])
    if idx.min() < 0:
        raise DataFormatError(f"{path}: negative index")
    n_obs, n, p = (idx.max(axis=0) + 1).tolist()
    if len(rows) != n_obs * n * p:
        raise DataFormatError(f"{path}: incomplete or duplicated (obs,row,col) grid")
    tensor = np.full((n_obs, n, p), np.nan)
    seen = np.zeros((n_obs, n, p), dtype=bool)
    for (i, r, c), v in zip(idx, vals):
        if seen[i, r, c]:
            raise DataFormatError(f"{path}: duplicate entry obs={i} row={r} col={c}")
        seen[i, r, c] = True
        tensor[i, r, c] = v
    if not seen.all():
        raise DataFormatError(f"{path}: incomplete (obs,row,col) grid")
    return tensor


def write_labels(path, labels):
    lines = ["obs,label"] + [f"{i},{int(l)}" for i, l in enumerate(labels)]
    _atomic_write(path, "\n".join(lines) + "\n")


def read_labels(path, n_obs=None) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["obs", "label"]:
            raise DataFormatError(f"{path}: expected header obs,label")
        pairs = []
        for k, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                pairs.append((int(rec[0]), int(rec[1])))
            except (ValueError, IndexError):
                raise DataFormatError(f"{path}:{k}: malformed record") from None
    pairs.sort()
    obs = [o for o, _ in pairs]
    if obs != list(range(len(pairs))):
        raise DataFormatError(f"{path}: obs ids must be 0..N-1, each once")
    if n_obs is not None and len(pairs) != n_obs:
        raise DataFormatError(f"{path}: {len(pairs)} labels for {n_obs} observations")
    labels = np.array([l for _, l in pairs], dtype=int)
    if np.any(labels < -1):
        raise DataFormatError(f"{path}: labels must be -1 or non-negative")
    return labels


def write_json(path, obj):
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")
