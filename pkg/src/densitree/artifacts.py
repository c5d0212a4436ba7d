"""CSV ingestion and the on-disk run layout."""

from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .kde import KernelKind

__all__ = [
    "AMP_MAGIC",
    "InputError",
    "fmt",
    "read_amplitudes",
    "read_labels",
    "read_numeric_csv",
    "read_table",
    "write_amplitudes",
    "write_csv",
    "write_run",
]

AMP_MAGIC = 0x4D415444  # b"DTAM" read as little-endian uint32
_KERNEL_ID = {KernelKind.GAUSSIAN: 0, KernelKind.T7: 1}
NA = "NA"


class InputError(ValueError):
    """Malformed input file; the message carries the offending line."""


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return NA
    if math.isinf(v):
        return "Inf" if v > 0 else "-Inf"
    return format(v, ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else fmt(c) for c in row])


def read_table(path) -> tuple[list, list]:
    """Header and raw string rows; raises InputError with a line number."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"{path}: cannot open ({exc.strerror})") from exc
    with fh:
        rows = list(csv.reader(fh))
    if not rows or not any(c.strip() for c in rows[0]):
        raise InputError(f"{path}: line 1: empty file or missing header")
    header = [c.strip() for c in rows[0]]
    body = []
    for lineno, r in enumerate(rows[1:], start=2):
        if not r or not any(c.strip() for c in r):
            continue
        if len(r) != len(header):
            raise InputError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(r)}")
        body.append((lineno, [c.strip() for c in r]))
    if not body:
        raise InputError(f"{path}: line 2: no data rows")
    return header, body


def _select(header, columns=None, drop=None):
    idx = list(range(len(header)))
    if columns:
        missing = [c for c in columns if c not in header]
        if missing:
            raise InputError(f"unknown column {missing[0]!r}")
        idx = [header.index(c) for c in columns]
    if drop:
        missing = [c for c in drop if c not in header]
        if missing:
            raise InputError(f"unknown column {missing[0]!r}")
        idx = [i for i in idx if header[i] not in drop]
    if not idx:
        raise InputError("no columns selected")
    return idx


def read_numeric_csv(path, columns=None, drop=None) -> tuple[list, np.ndarray]:
    header, body = read_table(path)
    idx = _select(header, columns, drop)
    out = np.empty((len(body), len(idx)))
    for r, (lineno, cells) in enumerate(body):
        for c, k in enumerate(idx):
            try:
                v = float(cells[k])
            except ValueError:
                raise InputError(f"{path}: line {lineno}: column {header[k]!r}: "
                                 f"not a number: {cells[k]!r}") from None
            if not math.isfinite(v):
                raise InputError(f"{path}: line {lineno}: column {header[k]!r}: non-finite value")
            out[r, c] = v
    return [header[k] for k in idx], out


def read_labels(path, column=None) -> np.ndarray:
    """Integer labels from the ``label`` column (or ``column``, or the last one)."""
    header, body = read_table(path)
    if column is None:
        column = "label" if "label" in header else header[-1]
    if column not in header:
        raise InputError(f"{path}: no column {column!r}")
    k = header.index(column)
    out = np.empty(len(body), dtype=np.int64)
    for r, (lineno, cells) in enumerate(body):
        try:
            v = float(cells[k])
        except ValueError:
            raise InputError(f"{path}: line {lineno}: label not a number: {cells[k]!r}") from None
        if v != int(v):
            raise InputError(f"{path}: line {lineno}: label must be an integer")
        out[r] = int(v)
    return out


def write_amplitudes(path, amplitudes, n: int, grid_pairs: int, kernel):
    amps = np.asarray(amplitudes, dtype="<f4")
    if len(amps) != n * (n - 1) // 2:
        raise ValueError("amplitude count does not match n")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4I", AMP_MAGIC, n, grid_pairs, _KERNEL_ID[KernelKind(kernel)]))
        fh.write(amps.tobytes())


def read_amplitudes(path) -> tuple[np.ndarray, int, int, KernelKind]:
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise InputError(f"{path}: truncated amplitude file")
    magic, n, gp, kid = struct.unpack("<4I", raw[:16])
    if magic != AMP_MAGIC:
        raise InputError(f"{path}: not an amplitude file")
    amps = np.frombuffer(raw[16:], dtype="<f4").astype(np.float32)
    if len(amps) != n * (n - 1) // 2:
        raise InputError(f"{path}: expected {n * (n - 1) // 2} amplitudes, found {len(amps)}")
    kernel = {v: k for k, v in _KERNEL_ID.items()}.get(kid)
    if kernel is None:
        raise InputError(f"{path}: unknown kernel id {kid}")
    return amps, n, gp, kernel


def _dump_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_run(out_dir, result, names):
    """Write every artifact of a clustering run into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    x = result.data
    n = len(x)
    write_csv(out / "data.csv", names, x.tolist())
    write_csv(out / "density.csv", ["index", "density"], zip(range(n), result.densities.tolist()))
    write_csv(out / "labels.csv", ["index", "label"], zip(range(n), result.labels.tolist()))
    write_csv(out / "cores.csv", ["index", "core"],
              ((i, NA if c == 0 else int(c)) for i, c in enumerate(result.cores.labels.tolist())))
    mf = result.mode_function
    write_csv(out / "modefn.csv", ["p", "m"], zip(mf.grid.tolist(), mf.counts.tolist()))
    (out / "tree.txt").write_text(result.tree.to_text())
    _dump_json(out / "tree.json", result.tree.to_dict())
    tr = result.trace
    write_csv(out / "stages.csv", ["index", "stage", "label", "score"],
              ((i, int(tr.stage_of[i]), int(result.labels[i]),
                float(tr.score[i])) for i in range(n)))
    if result.silhouette is not None:
        write_csv(out / "dbs.csv", ["index", "label", "dbs"], result.silhouette.sorted_rows())
    else:
        write_csv(out / "dbs.csv", ["index", "label", "dbs"], [])
    g = result.graph
    if g.amplitudes is not None:
        i, j = g.edges[:, 0], g.edges[:, 1]
        k = (i * (2 * n - i - 1)) // 2 + (j - i - 1)
        write_csv(out / "edges.csv", ["i", "j", "R"],
                  zip(i.tolist(), j.tolist(), g.amplitudes[k].astype(float).tolist()))
        write_amplitudes(out / "amplitudes.bin", g.amplitudes, n, g.grid_pairs, result.config.kernel)
    else:
        write_csv(out / "edges.csv", ["i", "j"], g.edges.tolist())
        stale = out / "amplitudes.bin"
        if stale.exists():
            stale.unlink()
    _dump_json(out / "params.json", result.config.to_dict())
