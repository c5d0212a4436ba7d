"""Gower dissimilarity for mixed-type tables and classical multidimensional scaling."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = ["ColumnType", "MixedTable", "classical_mds", "gower"]


class ColumnType(str, Enum):
    NUMERIC = "numeric"
    ORDRATIO = "ordratio"
    SYMM = "symm"
    ASYMM = "asymm"
    NOMINAL = "nominal"


@dataclass
class MixedTable:
    """Columns of equal length; ``None`` or NaN marks a missing cell.

    Ordered-ratio columns hold ordered levels; when ``levels`` gives their
    count L for a column, values are taken as 1..L, otherwise the observed
    distinct values are ranked.
    """
    columns: list
    types: list
    names: list | None = None
    levels: dict | None = None

    def __post_init__(self):
        if not self.columns:
            raise ValueError("table needs at least one column")
        self.types = [ColumnType(t) for t in self.types]
        if len(self.types) != len(self.columns):
            raise ValueError("one type per column is required")
        lengths = {len(c) for c in self.columns}
        if len(lengths) != 1:
            raise ValueError("columns differ in length")
        if self.names is None:
            self.names = [f"V{k + 1}" for k in range(len(self.columns))]
        for name, col, t in zip(self.names, self.columns, self.types):
            if t in (ColumnType.SYMM, ColumnType.ASYMM):
                vals = {v for v in col if not _missing(v)}
                if not vals <= {0, 1, 0.0, 1.0, "0", "1"}:
                    raise ValueError(f"binary column {name!r} must take values 0/1")

    @property
    def n(self) -> int:
        return len(self.columns[0])


def _missing(v) -> bool:
    if v is None:
        return True
    if isinstance(v, str):
        return v.strip() in ("", "NA")
    try:
        return bool(np.isnan(v))
    except TypeError:
        return False


def _numeric(col):
    out = np.full(len(col), np.nan)
    for i, v in enumerate(col):
        if not _missing(v):
            out[i] = float(v)
    return out


def _contribution(col, t: ColumnType, n_levels=None):
    """Per-pair (delta, weight) matrices for one column."""
    miss = np.array([_missing(v) for v in col])
    ok = ~miss[:, None] & ~miss[None, :]
    if t in (ColumnType.NUMERIC, ColumnType.ORDRATIO):
        x = _numeric(col)
        if t is ColumnType.ORDRATIO:
            # ordered levels become ranks 0..L-1, then interval-scaled
            if n_levels:
                x = x - 1.0
                rng = float(n_levels - 1)
            else:
                levels = np.unique(x[~miss])
                x = np.where(miss, np.nan, np.searchsorted(levels, np.nan_to_num(x)).astype(float))
                rng = float(len(levels) - 1)
        else:
            rng = float(np.nanmax(x) - np.nanmin(x)) if (~miss).any() else 0.0
        diff = np.abs(x[:, None] - x[None, :])
        delta = np.where(ok, diff / rng if rng > 0 else 0.0, 0.0)
        return delta, ok.astype(float)
    if t is ColumnType.ASYMM:
        x = _numeric(col)
        one = x == 1
        both_zero = (x[:, None] == 0) & (x[None, :] == 0)
        delta = (one[:, None] != one[None, :]).astype(float)
        w = ok & ~both_zero
        return np.where(w, delta, 0.0), w.astype(float)
    keys = np.array(["" if m else str(v) for v, m in zip(col, miss)], dtype=object)
    if t is ColumnType.SYMM:
        keys = np.array(["" if m else str(int(float(v))) for v, m in zip(col, miss)], dtype=object)
    delta = (keys[:, None] != keys[None, :]).astype(float)
    return np.where(ok, delta, 0.0), ok.astype(float)


def gower(table: MixedTable) -> np.ndarray:
    """Gower dissimilarity matrix (n x n, entries in [0, 1])."""
    n = table.n
    if n < 2:
        raise ValueError("gower needs at least 2 rows")
    num = np.zeros((n, n))
    den = np.zeros((n, n))
    levels = table.levels or {}
    for name, col, t in zip(table.names, table.columns, table.types):
        delta, w = _contribution(col, t, levels.get(name))
        num += w * delta
        den += w
    np.fill_diagonal(den, np.maximum(np.diag(den), 1.0))
    bad = np.argwhere(den == 0)
    if len(bad):
        i, j = (int(v) for v in bad[0])
        raise ValueError(f"rows {i} and {j} share no usable variable; dissimilarity undefined")
    d = num / den
    np.fill_diagonal(d, 0.0)
    return d


def classical_mds(D, k: int = 2, return_eigenvalues: bool = False):
    """Principal coordinates of a dissimilarity matrix.

    Double-centres the squared dissimilarities and keeps the ``k`` leading
    eigenvectors scaled by the square roots of their eigenvalues. Each
    column is signed so that its largest-magnitude entry is positive.
    """
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("dissimilarity matrix must be square")
    n = D.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in 1..{n - 1}")
    if not np.allclose(D, D.T, rtol=0, atol=1e-12):
        raise ValueError("dissimilarity matrix must be symmetric")
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (D * D) @ J
    B = 0.5 * (B + B.T)
    vals, vecs = np.linalg.eigh(B)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    tol = 1e-10 * max(1.0, abs(vals[0]))
    npos = int(np.sum(vals > tol))
    if k > npos:
        raise ValueError(f"only {npos} positive eigenvalues; choose k <= {npos}")
    X = vecs[:, :k] * np.sqrt(vals[:k])
    for j in range(k):
        if X[np.argmax(np.abs(X[:, j])), j] < 0:
            X[:, j] = -X[:, j]
    if return_eigenvalues:
        return X, vals
    return X
