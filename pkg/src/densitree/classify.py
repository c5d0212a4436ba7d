"""Allocation of low-density points to cluster cores by density log-ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kde import DegenerateDataError, KernelKind, h_norm, kepdf, kernel_roughness
from .levelset import CoreAssignment

__all__ = [
    "ClassificationConfig",
    "StageTrace",
    "classify",
    "group_bandwidth",
    "log_ratio",
    "se_weighted_ratio",
]


@dataclass
class ClassificationConfig:
    n_stage: int = 5
    se: bool = True
    hcores: bool = False

    def __post_init__(self):
        if self.n_stage < 0:
            raise ValueError("n_stage must be >= 0")


@dataclass
class StageTrace:
    stages: list = field(default_factory=list)
    stage_of: np.ndarray | None = None  # 0 for core points
    score: np.ndarray | None = None     # NaN for core points

    @property
    def n_stages(self) -> int:
        return len(self.stages)


def _top_two(dens: np.ndarray):
    order = np.argsort(-dens, axis=1, kind="stable")
    best = order[:, 0]
    rows = np.arange(len(dens))
    top = dens[rows, best]
    if dens.shape[1] > 1:
        second_idx = order[:, 1]
        second = dens[rows, second_idx]
    else:
        second_idx = best
        second = np.zeros(len(dens))
    return best, top, second_idx, second


def _ratios(top, second):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.log(top) - np.log(second)
    r[second == 0] = np.inf
    r[top == 0] = -np.inf
    return r


def log_ratio(core_densities):
    """Best label (1-based) and log(best / runner-up) for one point."""
    dens = np.asarray(core_densities, dtype=float)[None, :]
    if dens.shape[1] < 2:
        raise ValueError("need at least two groups")
    best, top, _, second = _top_two(dens)
    return int(best[0]) + 1, float(_ratios(top, second)[0])


def se_weighted_ratio(core_densities, sizes, hprods, kernel="gaussian", d: int = 1) -> float:
    """Log-ratio divided by its delta-method standard error.

    Var log f_m(x) ~ R(K)^d / (n_m prod(h_m) f_m(x)), summed over the best
    and runner-up groups.
    """
    dens = np.asarray(core_densities, dtype=float)[None, :]
    return float(_se_scores(dens, np.asarray(sizes, float), np.asarray(hprods, float),
                            KernelKind(kernel), d)[0])


def _se_scores(dens, sizes, hprods, kernel, d):
    best, top, second_idx, second = _top_two(dens)
    r = _ratios(top, second)
    rk = kernel_roughness(kernel) ** d
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        v1 = rk / (sizes[best] * hprods[best] * top)
        v2 = rk / (sizes[second_idx] * hprods[second_idx] * second)
        score = r / np.sqrt(v1 + v2)
    score[(second == 0) & (top > 0)] = np.inf
    score[top == 0] = -np.inf
    return score


def group_bandwidth(members: np.ndarray, hmult: float, fallback) -> np.ndarray:
    """Per-group normal-reference bandwidth times ``hmult``; ``fallback`` if undefined."""
    try:
        return h_norm(members) * hmult
    except DegenerateDataError:
        return np.asarray(fallback, dtype=float)


def classify(data, cores: CoreAssignment, cfg: ClassificationConfig | None = None,
             kernel="gaussian", hmult: float = 1.0, global_h=None, threads=None):
    """Block-sequential allocation of the points left out of the cores.

    Returns ``(labels, StageTrace)``; labels are 1..M for every point.
    """
    cfg = cfg or ClassificationConfig()
    kernel = KernelKind(kernel)
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, d = x.shape
    labels = np.array(cores.labels, dtype=np.int64)
    M = cores.M
    stage_of = np.zeros(n, dtype=np.int64)
    score_of = np.full(n, np.nan)
    trace = StageTrace(stage_of=stage_of, score=score_of)
    pending = np.flatnonzero(labels == 0)
    if cfg.n_stage == 0 or len(pending) == 0:
        return labels, trace
    if M < 1:
        raise ValueError("no cluster cores to classify against")
    if global_h is None:
        global_h = h_norm(x) * hmult
    global_h = np.asarray(global_h, dtype=float)
    if M == 1:
        labels[pending] = 1
        stage_of[pending] = 1
        score_of[pending] = np.inf
        trace.stages.append(labels.copy())
        return labels, trace

    core_pts = np.flatnonzero(labels > 0)
    block = math.ceil(len(pending) / cfg.n_stage)
    for stage in range(1, cfg.n_stage + 1):
        dens = np.empty((len(pending), M))
        sizes = np.empty(M)
        hprods = np.empty(M)
        for m in range(M):
            members = x[labels == m + 1]
            h = global_h if cfg.hcores else group_bandwidth(members, hmult, global_h)
            dens[:, m] = kepdf(x[pending], members, kernel, h, threads).values
            sizes[m] = len(members)
            hprods[m] = np.prod(h)
        best, top, _, second = _top_two(dens)
        if cfg.se:
            score = _se_scores(dens, sizes, hprods, kernel, d)
        else:
            score = _ratios(top, second)
        final = stage == cfg.n_stage or len(pending) <= block
        if final:
            take = np.arange(len(pending))
        else:
            # points no core reaches wait for the final stage
            live = np.flatnonzero(top > 0)
            take = live[np.lexsort((pending[live], -score[live]))][:block]
        chosen = pending[take]
        assigned = best[take] + 1
        dead = top[take] == 0
        if np.any(dead):
            # no core has positive density here: nearest core point decides
            for k in np.flatnonzero(dead):
                dist = np.sum((x[core_pts] - x[chosen[k]]) ** 2, axis=1)
                assigned[k] = cores.labels[core_pts[np.argmin(dist)]]
        labels[chosen] = assigned
        stage_of[chosen] = stage
        score_of[chosen] = score[take]
        trace.stages.append(labels.copy())
        pending = np.setdiff1d(pending, chosen)
        if final:
            break
    return labels, trace
