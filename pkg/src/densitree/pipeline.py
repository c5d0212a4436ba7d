"""End-to-end clustering: density, connection graph, level-set scan, classification, diagnostics."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .classify import ClassificationConfig, StageTrace, classify
from .diagnostics import DbsResult, dbs
from .graph import (ConnectionGraph, GraphType, build_delaunay, build_pairs,
                    build_unidimensional, rethreshold)
from .kde import KernelKind, as_data, h_norm, hprop2f, kepdf
from .levelset import ClusterTree, CoreAssignment, ModeFunction, scan

__all__ = ["ClusterResult", "RunConfig", "finish", "pdf_cluster", "recluster"]

_GRAPHTYPES = ("auto", "unidimensional", "delaunay", "pairs")


@dataclass
class RunConfig:
    graphtype: str = "auto"
    lam: float = 0.10
    kernel: str = "gaussian"
    bwtype: str = "fixed"
    hmult: float | None = None
    n_grid: int = 50
    grid_pairs: int = 10
    n_stage: int = 5
    se: bool = True
    hcores: bool = False
    standardize_delaunay: bool = True

    def validate(self):
        if self.graphtype not in _GRAPHTYPES:
            raise ValueError(f"unknown graphtype {self.graphtype!r}")
        if not 0 < self.lam < 1:
            raise ValueError("lambda must lie in (0, 1)")
        KernelKind(self.kernel)
        if self.bwtype not in ("fixed", "adaptive"):
            raise ValueError(f"unknown bwtype {self.bwtype!r}")
        if self.hmult is not None and not self.hmult > 0:
            raise ValueError("hmult must be positive")
        if self.n_grid < 2:
            raise ValueError("n_grid must be at least 2")
        if self.grid_pairs < 2:
            raise ValueError("grid_pairs must be at least 2")
        if self.n_stage < 0:
            raise ValueError("n_stage must be >= 0")
        return self

    def resolved(self, d: int) -> "RunConfig":
        """Copy with data-dependent defaults filled in."""
        self.validate()
        gt = self.graphtype
        if gt == "auto":
            gt = "unidimensional" if d == 1 else "delaunay" if d <= 3 else "pairs"
        if gt == "unidimensional" and d != 1:
            raise ValueError("unidimensional graph requires d = 1")
        if gt == "delaunay" and d not in (2, 3):
            raise ValueError("delaunay graph is available for d = 2 or 3 only; use pairs")
        hm = self.hmult if self.hmult is not None else (0.75 if d <= 6 else 1.0)
        return replace(self, graphtype=gt, hmult=float(hm), lam=float(self.lam))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown parameters: {', '.join(sorted(unknown))}")
        return cls(**d).validate()


@dataclass
class ClusterResult:
    data: np.ndarray
    config: RunConfig
    bandwidth: np.ndarray
    densities: np.ndarray
    graph: ConnectionGraph
    mode_function: ModeFunction
    tree: ClusterTree
    cores: CoreAssignment
    labels: np.ndarray
    trace: StageTrace
    silhouette: DbsResult | None
    timings: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return self.cores.M


def _bandwidth(x, cfg: RunConfig):
    pilot = h_norm(x)
    if cfg.bwtype == "adaptive":
        return cfg.hmult * hprop2f(x, pilot)
    return cfg.hmult * pilot


def _build_graph(x, cfg: RunConfig, h, f, threads):
    gt = GraphType(cfg.graphtype)
    if gt is GraphType.UNIDIMENSIONAL:
        return build_unidimensional(x)
    if gt is GraphType.DELAUNAY:
        return build_delaunay(x, standardize=cfg.standardize_delaunay)
    return build_pairs(x, h, cfg.kernel, cfg.grid_pairs, cfg.lam, densities=f, threads=threads)


def finish(x, densities, graph: ConnectionGraph, cfg: RunConfig, h, threads=None,
           timings: dict | None = None) -> ClusterResult:
    """Scan, classify and score given the density at the points and the graph."""
    timings = {} if timings is None else timings
    t0 = time.perf_counter()
    mf, tree, cores = scan(graph, densities, n_grid=cfg.n_grid)
    timings["scan"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    # classification uses fixed bandwidths even after an adaptive estimate
    global_h = h if np.ndim(h) == 1 else h_norm(x) * cfg.hmult
    ccfg = ClassificationConfig(cfg.n_stage, cfg.se, cfg.hcores)
    labels, trace = classify(x, cores, ccfg, cfg.kernel, cfg.hmult, global_h, threads)
    timings["classify"] = time.perf_counter() - t0

    sil = None
    if cores.M >= 2 and np.all(labels > 0):
        t0 = time.perf_counter()
        priors = cores.counts() / cores.counts().sum()
        sil = dbs(x, labels, priors, cfg.kernel, cfg.hmult, threads)
        timings["dbs"] = time.perf_counter() - t0
    return ClusterResult(data=x, config=cfg, bandwidth=np.asarray(h), densities=np.asarray(densities),
                         graph=graph, mode_function=mf, tree=tree, cores=cores, labels=labels,
                         trace=trace, silhouette=sil, timings=timings)


def pdf_cluster(data, cfg: RunConfig | None = None, threads=None, **overrides) -> ClusterResult:
    """Cluster ``data`` (n x d) by the level sets of a kernel density estimate."""
    cfg = replace(cfg or RunConfig(), **overrides)
    x = as_data(data)
    cfg = cfg.resolved(x.shape[1])
    timings = {}
    t0 = time.perf_counter()
    h = _bandwidth(x, cfg)
    f = kepdf(x, x, cfg.kernel, h, threads).values
    timings["density"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    graph = _build_graph(x, cfg, h, f, threads)
    timings["graph"] = time.perf_counter() - t0
    return finish(x, f, graph, cfg, h, threads, timings)


def recluster(result: ClusterResult, lam: float, threads=None) -> ClusterResult:
    """Re-run from the stored pair amplitudes at a new tolerance."""
    cfg = replace(result.config, lam=float(lam)).validate()
    graph = rethreshold(result.graph, cfg.lam)
    return finish(result.data, result.densities, graph, cfg, result.bandwidth, threads)
