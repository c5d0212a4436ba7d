"""Density-based silhouette and the adjusted Rand index."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .classify import group_bandwidth
from .kde import KernelKind, as_data, h_norm, kepdf

__all__ = ["DbsResult", "adj_rand_index", "dbs", "dbs_from_densities"]


@dataclass
class DbsResult:
    values: np.ndarray
    labels: np.ndarray
    priors: np.ndarray

    def sorted_rows(self):
        """(index, label, dbs) rows ordered by label, then decreasing dbs, then index."""
        idx = np.lexsort((np.arange(len(self.values)), -self.values, self.labels))
        return [(int(i), int(self.labels[i]), float(self.values[i])) for i in idx]


def _check_labels(labels, n=None) -> tuple[np.ndarray, int]:
    lab = np.asarray(labels)
    if lab.ndim != 1:
        raise ValueError("labels must be a vector")
    if n is not None and len(lab) != n:
        raise ValueError(f"{len(lab)} labels for {n} observations")
    if not np.all(lab == np.round(lab)) or lab.min() < 1:
        raise ValueError("labels must be integers 1..M")
    lab = lab.astype(np.int64)
    M = int(lab.max())
    empty = np.flatnonzero(np.bincount(lab, minlength=M + 1)[1:] == 0)
    if empty.size:
        raise ValueError(f"class {int(empty[0]) + 1} has no members")
    return lab, M


def _normalize_priors(priors, M, counts):
    if priors is None:
        return counts / counts.sum()
    p = np.asarray(priors, dtype=float).ravel()
    if len(p) != M:
        raise ValueError(f"{len(p)} priors for {M} classes")
    if np.any(~(p > 0)) or not np.all(np.isfinite(p)):
        raise ValueError("priors must be positive")
    total = p.sum()
    if abs(total - 1.0) > 1e-12:
        warnings.warn("priors do not sum to 1; normalizing", stacklevel=3)
        p = p / total
    return p


def dbs_from_densities(dens, labels, priors=None) -> DbsResult:
    """Silhouette from an (n, M) matrix of class densities at the points."""
    dens = np.asarray(dens, dtype=float)
    lab, M = _check_labels(labels, dens.shape[0])
    if M < 2 or dens.shape[1] != M:
        raise ValueError("density-based silhouette needs at least two classes")
    pri = _normalize_priors(priors, M, np.bincount(lab, minlength=M + 1)[1:].astype(float))
    w = dens * pri
    rows = np.arange(len(lab))
    own = w[rows, lab - 1]
    others = w.copy()
    others[rows, lab - 1] = -np.inf
    rival = others.max(axis=1)
    # posterior normalizers cancel in the log-ratio
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.log(own) - np.log(rival)
    raw[(rival == 0) & (own > 0)] = np.inf
    raw[(own == 0) & (rival > 0)] = -np.inf
    raw[(own == 0) & (rival == 0)] = 0.0
    finite = np.isfinite(raw)
    scale = np.max(np.abs(raw[finite])) if finite.any() else 0.0
    out = np.empty_like(raw)
    if scale > 0:
        out[finite] = raw[finite] / scale
    else:
        out[finite] = 0.0
    out[~finite] = np.sign(raw[~finite])
    return DbsResult(values=out, labels=lab, priors=pri)


def dbs(data, labels, priors=None, kernel="gaussian", hmult: float = 1.0, threads=None) -> DbsResult:
    """Density-based silhouette of a partition.

    Each class density uses that class's own normal-reference bandwidth
    times ``hmult``; priors default to the class proportions.
    """
    x = as_data(data)
    lab, M = _check_labels(labels, len(x))
    if M < 2:
        raise ValueError("density-based silhouette needs at least two classes")
    kernel = KernelKind(kernel)
    fallback = h_norm(x) * hmult
    dens = np.empty((len(x), M))
    for m in range(M):
        members = x[lab == m + 1]
        h = group_bandwidth(members, hmult, fallback)
        dens[:, m] = kepdf(x, members, kernel, h, threads).values
    return dbs_from_densities(dens, lab, priors)


def _comb2(v):
    v = np.asarray(v, dtype=float)
    return v * (v - 1) / 2


def adj_rand_index(a, b) -> float:
    """Hubert-Arabie adjusted Rand index between two labelings."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 1 or b.ndim != 1 or len(a) != len(b):
        raise ValueError("label vectors must have equal length")
    n = len(a)
    if n < 2:
        raise ValueError("need at least 2 observations")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    index = _comb2(table).sum()
    sa = _comb2(table.sum(axis=1)).sum()
    sb = _comb2(table.sum(axis=0)).sum()
    expected = sa * sb / (n * (n - 1) / 2)
    denom = 0.5 * (sa + sb) - expected
    if denom == 0 or math.isclose(denom, 0.0, abs_tol=1e-12):
        same = table.shape[0] == table.shape[1] and np.count_nonzero(table) == table.shape[0]
        return 1.0 if same else 0.0
    return float((index - expected) / denom)
