"""Incremental Bowyer-Watson Delaunay triangulation in 2-D and 3-D.

Predicates are evaluated in floating point behind a conservative error
filter and recomputed with exact rationals when the filter fails.
Co-spherical configurations are resolved by perturbing the lifted height
of every point by an infinitesimal that decreases with its index, so
lower indices dominate. Hull facets are closed by ghost simplices that
share a vertex at infinity.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np

INF = -1
_FILTER = 1e-10


class TriangulationError(ValueError):
    pass


def _det(m):
    k = len(m)
    if k == 1:
        return m[0][0]
    if k == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if k == 3:
        a, b, c = m
        return (a[0] * (b[1] * c[2] - b[2] * c[1])
                - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0]))
    total = 0
    for j in range(k):
        if m[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _perm(m):
    k = len(m)
    if k == 1:
        return abs(m[0][0])
    total = 0.0
    for j in range(k):
        if m[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += abs(m[0][j]) * _perm(minor)
    return total


def _sign(x) -> int:
    return (x > 0) - (x < 0)


class _Geometry:
    """Orientation and in-sphere predicates over a fixed point set."""

    def __init__(self, points: np.ndarray):
        self.pts = [tuple(float(v) for v in p) for p in points]
        self._exact = {}
        self.d = points.shape[1]

    def exact(self, i):
        e = self._exact.get(i)
        if e is None:
            e = tuple(Fraction(v) for v in self.pts[i])
            self._exact[i] = e
        return e

    def orient(self, idx) -> int:
        """Sign of det(p_k - p_last) over the d + 1 point indices ``idx``."""
        last = self.pts[idx[-1]]
        m = [[a - b for a, b in zip(self.pts[i], last)] for i in idx[:-1]]
        det = _det(m)
        if abs(det) > _FILTER * _perm(m):
            return _sign(det)
        last = self.exact(idx[-1])
        m = [[a - b for a, b in zip(self.exact(i), last)] for i in idx[:-1]]
        return _sign(_det(m))

    def orient_point(self, idx, point) -> int:
        """Exact orientation of the indexed points followed by a rational point."""
        m = [[a - b for a, b in zip(self.exact(i), point)] for i in idx]
        return _sign(_det(m))

    def inside(self, simplex, q, osign: int) -> bool:
        """True when q lies inside the (perturbed) circumsphere of ``simplex``."""
        pq = self.pts[q]
        m = []
        for i in simplex:
            row = [a - b for a, b in zip(self.pts[i], pq)]
            row.append(sum(v * v for v in row))
            m.append(row)
        det = _det(m)
        if abs(det) > _FILTER * _perm(m):
            return _sign(det) == osign
        eq = self.exact(q)
        m = []
        for i in simplex:
            row = [a - b for a, b in zip(self.exact(i), eq)]
            row.append(sum(v * v for v in row))
            m.append(row)
        s = _sign(_det(m))
        if s == 0:
            s = self._perturbed_sign(simplex, q, m, osign)
        return s == osign

    def _perturbed_sign(self, simplex, q, m, osign: int) -> int:
        # d/d(height of vertex k) is the cofactor of the lifted column;
        # d/d(height of q) is -orientation(simplex).
        d = self.d
        coeffs = {}
        for k, v in enumerate(simplex):
            minor = [row[:d] for j, row in enumerate(m) if j != k]
            cof = _det(minor)
            coeffs[v] = cof if (k + d) % 2 == 0 else -cof
        coeffs[q] = -osign
        for v in sorted(coeffs):
            s = _sign(coeffs[v])
            if s:
                return s
        raise TriangulationError("degenerate in-sphere test could not be resolved")


class Delaunay:
    """Delaunay triangulation of an (n, d) point array, d in {2, 3}.

    Coincident points are not inserted; each is mapped to the first point
    with identical coordinates (see :attr:`duplicate_of`).
    """

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] not in (2, 3):
            raise TriangulationError("Delaunay triangulation supports d = 2 or d = 3 only")
        n, d = pts.shape
        if n < d + 1:
            raise TriangulationError(f"need at least {d + 1} points in {d}-D, got {n}")
        if not np.all(np.isfinite(pts)):
            raise TriangulationError("points must be finite")
        self.points = pts
        self.d = d
        self.geom = _Geometry(pts)
        self.duplicate_of = {}
        self.simplices = {}
        self._osign = {}
        self._facets = {}
        self._next_id = 0
        self._last = None
        self._build()

    # -- construction -------------------------------------------------
    def _initial(self):
        g, d, n = self.geom, self.d, len(self.geom.pts)
        chosen = [0]
        for i in range(1, n):
            if len(chosen) == d + 1:
                break
            if self._independent(chosen + [i]):
                chosen.append(i)
        if len(chosen) < d + 1:
            raise TriangulationError("points are degenerate (all collinear or coplanar)")
        return chosen

    def _independent(self, idx) -> bool:
        # affine independence of the given (up to d + 1) points, exactly
        g = self.geom
        base = g.exact(idx[0])
        vecs = [[a - b for a, b in zip(g.exact(i), base)] for i in idx[1:]]
        k = len(vecs)
        gram = [[sum(a * b for a, b in zip(u, v)) for v in vecs] for u in vecs]
        return _det(gram) != 0 if k else True

    def _add(self, verts):
        verts = tuple(sorted(verts))
        sid = self._next_id
        self._next_id += 1
        if verts[0] == INF:
            fin = verts[1:]
            s = self.geom.orient_point(fin, self._ref)
            if s == 0:
                raise TriangulationError("internal error: ghost facet through interior reference")
            self._osign[sid] = -s
        else:
            s = self.geom.orient(verts)
            if s == 0:
                raise TriangulationError("internal error: flat simplex created")
            self._osign[sid] = s
            self._last = sid
        self.simplices[sid] = verts
        for f in combinations(verts, self.d):
            self._facets.setdefault(f, []).append(sid)
        return sid

    def _remove(self, sid):
        verts = self.simplices.pop(sid)
        del self._osign[sid]
        for f in combinations(verts, self.d):
            lst = self._facets[f]
            lst.remove(sid)
            if not lst:
                del self._facets[f]

    def _neighbor(self, sid, facet):
        for other in self._facets[facet]:
            if other != sid:
                return other
        return None

    def _build(self):
        g, d = self.geom, self.d
        init = self._initial()
        self._ref = tuple(sum(c) / (d + 1) for c in zip(*(g.exact(i) for i in init)))
        seen = {}
        for i in init:
            seen[g.pts[i]] = i
        self._add(init)
        for f in combinations(init, d):
            self._add((INF,) + f)
        init_set = set(init)
        for q in range(len(g.pts)):
            if q in init_set:
                continue
            key = g.pts[q]
            if key in seen:
                self.duplicate_of[q] = seen[key]
                continue
            seen[key] = q
            self._insert(q)

    def _conflict(self, sid, q, cache):
        hit = cache.get(sid)
        if hit is not None:
            return hit
        verts = self.simplices[sid]
        if verts[0] != INF:
            res = self.geom.inside(verts, q, self._osign[sid])
        else:
            fin = verts[1:]
            s = self.geom.orient(fin + (q,))
            if s == 0:
                res = self._conflict(self._neighbor(sid, fin), q, cache)
            else:
                res = s == self._osign[sid]
        cache[sid] = res
        return res

    def _locate(self, q):
        g = self.geom
        sid = self._last
        for _ in range(4 * len(self.simplices) + 16):
            verts = self.simplices[sid]
            osign = self._osign[sid]
            moved = False
            for k in range(self.d + 1):
                probe = verts[:k] + (q,) + verts[k + 1:]
                if g.orient(probe) == -osign:
                    facet = verts[:k] + verts[k + 1:]
                    nxt = self._neighbor(sid, facet)
                    if self.simplices[nxt][0] == INF:
                        return nxt
                    sid = nxt
                    moved = True
                    break
            if not moved:
                return sid
        # walk did not settle; fall back to a scan
        cache = {}
        for sid in sorted(self.simplices):
            if self._conflict(sid, q, cache):
                return sid
        raise TriangulationError("point location failed")

    def _insert(self, q):
        seed = self._locate(q)
        cache = {}
        if not self._conflict(seed, q, cache):
            raise TriangulationError("internal error: located simplex not in conflict")
        region = {seed}
        stack = [seed]
        boundary = []
        while stack:
            sid = stack.pop()
            for facet in combinations(self.simplices[sid], self.d):
                nb = self._neighbor(sid, facet)
                if nb in region:
                    continue
                if self._conflict(nb, q, cache):
                    region.add(nb)
                    stack.append(nb)
                else:
                    boundary.append(facet)
        for sid in sorted(region):
            self._remove(sid)
        for facet in boundary:
            self._add(facet + (q,))

    # -- queries ------------------------------------------------------
    def finite_simplices(self) -> np.ndarray:
        out = sorted(v for v in self.simplices.values() if v[0] != INF)
        return np.array(out, dtype=np.int64).reshape(-1, self.d + 1)

    def edges(self) -> np.ndarray:
        """Sorted (i, j) edge array with i < j, duplicates attached to their originals."""
        es = set()
        for v in self.simplices.values():
            if v[0] == INF:
                continue
            es.update(combinations(v, 2))
        if self.duplicate_of:
            adj = {}
            for i, j in es:
                adj.setdefault(i, set()).add(j)
                adj.setdefault(j, set()).add(i)
            extra = set()
            for dup, orig in self.duplicate_of.items():
                extra.add((min(dup, orig), max(dup, orig)))
                for nb in adj.get(orig, ()):
                    extra.add((min(dup, nb), max(dup, nb)))
                for other, o2 in self.duplicate_of.items():
                    if o2 == orig and other != dup:
                        extra.add((min(dup, other), max(dup, other)))
            es |= extra
        return np.array(sorted(es), dtype=np.int64).reshape(-1, 2)
