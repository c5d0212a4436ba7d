"""Connection graphs over observations and connected components of vertex subsets."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._threads import resolve_threads
from .delaunay import Delaunay
from .kde import KernelKind, as_data, kepdf

__all__ = [
    "ConnectionGraph",
    "GraphType",
    "build_delaunay",
    "build_pairs",
    "build_unidimensional",
    "connected_components",
    "pair_index",
    "rethreshold",
    "valley_amplitude",
]


class GraphType(str, Enum):
    UNIDIMENSIONAL = "unidimensional"
    DELAUNAY = "delaunay"
    PAIRS = "pairs"


@dataclass
class ConnectionGraph:
    n: int
    edges: np.ndarray
    gtype: GraphType
    amplitudes: np.ndarray | None = None
    lam: float | None = None
    grid_pairs: int | None = None
    _adj: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    def adjacency(self):
        """CSR-style (indptr, indices) with neighbours sorted ascending."""
        if self._adj is None:
            e = self.edges
            both = np.concatenate([e, e[:, ::-1]]) if len(e) else e
            order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.array([], int)
            both = both[order]
            counts = np.bincount(both[:, 0], minlength=self.n) if len(both) else np.zeros(self.n, int)
            indptr = np.concatenate([[0], np.cumsum(counts)])
            self._adj = (indptr, both[:, 1].copy())
        return self._adj


def _canonical(edges) -> np.ndarray:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(e) == 0:
        return e
    e = np.sort(e, axis=1)
    e = e[e[:, 0] != e[:, 1]]
    return np.unique(e, axis=0)


def build_unidimensional(data) -> ConnectionGraph:
    """Chain graph joining observations adjacent in sorted order."""
    x = as_data(data)
    if x.shape[1] != 1:
        raise ValueError("unidimensional graph requires d = 1")
    order = np.lexsort((np.arange(len(x)), x[:, 0]))
    edges = np.column_stack([order[:-1], order[1:]])
    return ConnectionGraph(len(x), _canonical(edges), GraphType.UNIDIMENSIONAL)


def build_delaunay(data, standardize: bool = False) -> ConnectionGraph:
    """Delaunay edges of the sample (d in {2, 3}).

    With ``standardize`` each coordinate is divided by its standard
    deviation first, so that the triangulation does not depend on units.
    """
    x = as_data(data)
    if standardize:
        sd = x.std(axis=0, ddof=1) if len(x) > 1 else np.ones(x.shape[1])
        x = x / np.where(sd > 0, sd, 1.0)
    edges = Delaunay(x).edges()
    return ConnectionGraph(len(x), _canonical(edges), GraphType.DELAUNAY)


def valley_amplitude(section) -> float:
    """Share of the water-filled area that lies above the section.

    The filled curve is min(running max from the left, running max from
    the right); both areas use the trapezoid rule.
    """
    f = np.asarray(section, dtype=float)
    if f.ndim != 1 or f.size < 2:
        raise ValueError("section needs at least 2 values")
    if np.any(f < 0):
        raise ValueError("section values must be non-negative")
    g = np.minimum(np.maximum.accumulate(f), np.maximum.accumulate(f[::-1])[::-1])
    total = np.sum(g[1:] + g[:-1])
    if total <= 0:
        return 0.0
    gap = g - f
    return float(np.sum(gap[1:] + gap[:-1]) / total)


def _valley_rows(sections: np.ndarray) -> np.ndarray:
    g = np.minimum(np.maximum.accumulate(sections, axis=1),
                   np.maximum.accumulate(sections[:, ::-1], axis=1)[:, ::-1])
    gap = g - sections
    num = np.sum(gap[:, 1:] + gap[:, :-1], axis=1)
    den = np.sum(g[:, 1:] + g[:, :-1], axis=1)
    out = np.zeros(len(sections))
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out


def pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major upper-triangular (i, j) pairs, i < j."""
    return np.triu_indices(n, k=1)


def _edges_below(n: int, amplitudes: np.ndarray, lam: float) -> np.ndarray:
    i, j = pair_index(n)
    keep = amplitudes < np.float32(lam)
    return np.column_stack([i[keep], j[keep]])


def build_pairs(data, h=None, kernel="gaussian", grid_pairs: int = 10, lam: float = 0.10,
                densities=None, threads: int | None = None, block: int = 2048) -> ConnectionGraph:
    """Pairwise valley-amplitude graph.

    Every pair's density section is sampled at ``grid_pairs`` points, its
    valley amplitude stored (float32), and an edge kept when it is below
    ``lam``. ``densities`` may carry the estimate at the observations to
    skip re-evaluating the segment endpoints.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    if grid_pairs < 2:
        raise ValueError("grid_pairs must be at least 2")
    x = as_data(data)
    n = len(x)
    kernel = KernelKind(kernel)
    if densities is None:
        densities = kepdf(x, x, kernel, h).values
    densities = np.asarray(densities, dtype=float)
    ii, jj = pair_index(n)
    t = np.arange(1, grid_pairs - 1) / (grid_pairs - 1)

    def run(start):
        a = ii[start:start + block]
        b = jj[start:start + block]
        sec = np.empty((len(a), grid_pairs))
        sec[:, 0] = densities[a]
        sec[:, -1] = densities[b]
        if len(t):
            diff = x[b] - x[a]
            pts = x[a][:, None, :] + t[None, :, None] * diff[:, None, :]
            vals = kepdf(pts.reshape(-1, x.shape[1]), x, kernel, h, threads=1).values
            sec[:, 1:-1] = vals.reshape(len(a), -1)
        return _valley_rows(sec)

    starts = range(0, len(ii), block)
    workers = resolve_threads(threads)
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    amps = np.concatenate(parts).astype(np.float32) if parts else np.zeros(0, np.float32)
    return ConnectionGraph(n, _edges_below(n, amps, lam), GraphType.PAIRS,
                           amplitudes=amps, lam=float(lam), grid_pairs=grid_pairs)


def rethreshold(graph: ConnectionGraph, lam: float) -> ConnectionGraph:
    """Re-cut a pairs graph at a new tolerance using its stored amplitudes."""
    if graph.gtype is not GraphType.PAIRS or graph.amplitudes is None:
        raise ValueError("rethreshold needs a pairs graph with stored amplitudes")
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    return ConnectionGraph(graph.n, _edges_below(graph.n, graph.amplitudes, lam), GraphType.PAIRS,
                           amplitudes=graph.amplitudes, lam=float(lam), grid_pairs=graph.grid_pairs)


def connected_components(graph: ConnectionGraph, active=None) -> np.ndarray:
    """Label components of the subgraph induced by ``active``.

    Returns an n-vector: -1 for inactive vertices, otherwise 0, 1, ... in
    order of each component's smallest vertex index.
    """
    n = graph.n
    mask = np.zeros(n, dtype=bool)
    if active is None:
        mask[:] = True
    else:
        active = np.asarray(active)
        if active.dtype == bool:
            mask[:] = active
        else:
            mask[active.astype(np.int64)] = True
    indptr, indices = graph.adjacency()
    ptr = indptr.tolist()
    nbrs = indices.tolist()
    on = mask.tolist()
    labels = [-1] * n
    current = 0
    for start in np.flatnonzero(mask).tolist():
        if labels[start] >= 0:
            continue
        labels[start] = current
        stack = [start]
        while stack:
            v = stack.pop()
            for w in nbrs[ptr[v]:ptr[v + 1]]:
                if on[w] and labels[w] < 0:
                    labels[w] = current
                    stack.append(w)
        current += 1
    return np.array(labels, dtype=np.int64)
