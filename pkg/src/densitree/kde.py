"""Product-kernel density estimation with fixed or adaptive bandwidths."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._threads import resolve_threads

__all__ = [
    "DegenerateDataError",
    "DensityEstimate",
    "KernelKind",
    "as_data",
    "eval_segment",
    "h_norm",
    "hprop2f",
    "kepdf",
    "kernel_roughness",
    "t7_constant",
]

_CHUNK = 4096


class DegenerateDataError(ValueError):
    """Raised when the data cannot support the requested estimate."""


class KernelKind(str, Enum):
    GAUSSIAN = "gaussian"
    T7 = "t7"


def t7_constant(nu: int = 7) -> float:
    """Normalizing constant of the Student t density with ``nu`` degrees of freedom."""
    return math.gamma((nu + 1) / 2) / (math.gamma(nu / 2) * math.sqrt(nu * math.pi))


_C7 = t7_constant(7)
_GAUSS_C = 1.0 / math.sqrt(2.0 * math.pi)


def kernel_roughness(kernel) -> float:
    """Return R(K) = integral of K(u)**2 for the univariate kernel."""
    kernel = KernelKind(kernel)
    if kernel is KernelKind.GAUSSIAN:
        return 1.0 / (2.0 * math.sqrt(math.pi))
    nu = 7
    # int (1 + u^2/nu)^-(nu+1) du = sqrt(nu) * B(1/2, nu + 1/2)
    beta = math.exp(math.lgamma(0.5) + math.lgamma(nu + 0.5) - math.lgamma(nu + 1.0))
    return _C7 ** 2 * math.sqrt(nu) * beta


def as_data(x, name: str = "data") -> np.ndarray:
    """Coerce ``x`` to a finite float matrix of shape (n, d)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D, got {arr.ndim}-D")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains missing or non-finite values")
    return arr


@dataclass
class DensityEstimate:
    eval_points: np.ndarray
    values: np.ndarray
    kernel: KernelKind
    bandwidth: np.ndarray
    data: np.ndarray

    @property
    def adaptive(self) -> bool:
        return self.bandwidth.ndim == 2


def h_norm(data) -> np.ndarray:
    """Normal-reference bandwidth vector, one entry per coordinate.

    Uses the sample standard deviation (divisor n - 1) and the factor
    (4 / ((d + 2) n)) ** (1 / (d + 4)).
    """
    x = as_data(data)
    n, d = x.shape
    if n < 2:
        raise DegenerateDataError("h_norm needs at least 2 observations")
    s = x.std(axis=0, ddof=1)
    bad = np.flatnonzero(~(s > 0))
    if bad.size:
        raise DegenerateDataError(f"coordinate {int(bad[0])} has zero variance")
    return s * (4.0 / ((d + 2.0) * n)) ** (1.0 / (d + 4.0))


def _bandwidth_matrix(h, n: int, d: int) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim == 0:
        h = np.full(d, float(h))
    if h.ndim == 1:
        if h.shape[0] != d:
            raise ValueError(f"bandwidth has {h.shape[0]} entries, data has {d} columns")
        out = np.broadcast_to(h, (n, d))
    elif h.ndim == 2:
        if h.shape != (n, d):
            raise ValueError(f"adaptive bandwidth must be {n}x{d}, got {h.shape[0]}x{h.shape[1]}")
        out = h
    else:
        raise ValueError("bandwidth must be a vector or an n x d matrix")
    if not np.all(out > 0) or not np.all(np.isfinite(out)):
        raise ValueError("bandwidths must be finite and strictly positive")
    return out


def _kernel_sum(y: np.ndarray, x: np.ndarray, H: np.ndarray, kernel: KernelKind) -> np.ndarray:
    # Accumulate over observations in ascending index order; each eval
    # point's value is then independent of how eval points are chunked.
    n, d = x.shape
    total = np.zeros(y.shape[0])
    if kernel is KernelKind.GAUSSIAN:
        norm = _GAUSS_C ** d
        for i in range(n):
            u = (y - x[i]) / H[i]
            total += np.exp(-0.5 * np.sum(u * u, axis=1)) * (norm / np.prod(H[i]))
    else:
        norm = _C7 ** d
        for i in range(n):
            u = (y - x[i]) / H[i]
            t = 1.0 + u * u / 7.0
            t2 = t * t
            total += (norm / np.prod(H[i])) / np.prod(t2 * t2, axis=1)
    return total / n


def kepdf(eval_points, data, kernel="gaussian", h=None, threads: int | None = None) -> DensityEstimate:
    """Evaluate the product-kernel estimate built on ``data`` at ``eval_points``.

    ``h`` is either a d-vector (fixed bandwidth) or an n x d matrix with one
    bandwidth vector per observation (adaptive). Defaults to :func:`h_norm`.
    """
    kernel = KernelKind(kernel)
    x = as_data(data)
    y = as_data(eval_points, "eval_points")
    n, d = x.shape
    if y.shape[1] != d:
        raise ValueError(f"eval points have {y.shape[1]} columns, data has {d}")
    if h is None:
        h = h_norm(x)
    H = _bandwidth_matrix(h, n, d)

    m = y.shape[0]
    workers = resolve_threads(threads)
    if workers <= 1 or m <= _CHUNK:
        values = _kernel_sum(y, x, H, kernel)
    else:
        starts = range(0, m, _CHUNK)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(lambda s: _kernel_sum(y[s:s + _CHUNK], x, H, kernel), starts)
            values = np.concatenate(list(parts))
    bw = np.array(H[0]) if np.asarray(h).ndim < 2 else np.array(H)
    return DensityEstimate(eval_points=y, values=values, kernel=kernel, bandwidth=bw, data=x)


def hprop2f(data, pilot_h=None) -> np.ndarray:
    """Adaptive bandwidths: the pilot vector scaled by (f(x_i) / g) ** -1/2.

    ``f`` is a fixed-bandwidth Gaussian pilot estimate and ``g`` the
    geometric mean of its values at the observations.
    """
    x = as_data(data)
    if x.shape[0] < 2:
        raise DegenerateDataError("hprop2f needs at least 2 observations")
    pilot_h = h_norm(x) if pilot_h is None else np.asarray(pilot_h, dtype=float)
    pilot = kepdf(x, x, KernelKind.GAUSSIAN, pilot_h).values
    if np.any(pilot <= 0):
        raise DegenerateDataError("pilot density vanishes at an observation")
    logf = np.log(pilot)
    lam = np.exp(-0.5 * (logf - logf.mean()))
    return lam[:, None] * np.broadcast_to(pilot_h, x.shape)


def eval_segment(a, b, npts: int, data, kernel="gaussian", h=None, threads: int | None = None) -> np.ndarray:
    """Density at ``npts`` equispaced points from ``a`` to ``b`` (both included)."""
    if npts < 2:
        raise ValueError("npts must be at least 2")
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    t = np.arange(npts) / (npts - 1)
    pts = a + t[:, None] * (b - a)
    pts[-1] = b
    return kepdf(pts, data, kernel, h, threads).values
