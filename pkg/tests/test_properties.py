"""Randomized property suites; the hypothesis profile in conftest runs 100 cases each."""

import math

import numpy as np
from hypothesis import assume, given, strategies as st

from densitree.delaunay import Delaunay
from densitree.diagnostics import adj_rand_index, dbs_from_densities
from densitree.graph import ConnectionGraph, GraphType, build_unidimensional, connected_components, valley_amplitude
from densitree.kde import h_norm, kepdf
from densitree.levelset import mode_properties_check, scan
from densitree.mixed import classical_mds

N_CASES = 100


# -- connected components vs reachability ----------------------------------

@st.composite
def random_graphs(draw):
    n = draw(st.integers(1, 30))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), max_size=60)) if pairs else []
    active = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return n, edges, np.array(active)


def reachability(n, edges):
    R = np.eye(n, dtype=bool)
    for i, j in edges:
        R[i, j] = R[j, i] = True
    for k in range(n):
        R |= R[:, k:k + 1] & R[k:k + 1, :]
    return R


@given(random_graphs())
def test_components_match_reachability(case):
    n, edges, active = case
    sub = [(i, j) for i, j in edges if active[i] and active[j]]
    R = reachability(n, sub)
    lab = connected_components(ConnectionGraph(n, edges, GraphType.DELAUNAY), active)
    assert np.all(lab[~active] == -1)
    act = np.flatnonzero(active)
    for a in act:
        for b in act:
            assert (lab[a] == lab[b]) == R[a, b]
    # labels follow the smallest member index
    firsts = [np.flatnonzero(lab == c).min() for c in range(lab.max() + 1)]
    assert firsts == sorted(firsts)
    shuffled = ConnectionGraph(n, list(reversed(edges)), GraphType.DELAUNAY)
    assert np.array_equal(connected_components(shuffled, active), lab)


# -- Delaunay empty circumcircle ---------------------------------------------

def _incircle(a, b, c, d):
    rows = []
    for p in (a, b, c):
        dx, dy = p[0] - d[0], p[1] - d[1]
        rows.append((dx, dy, dx * dx + dy * dy))
    (a0, a1, a2), (b0, b1, b2), (c0, c1, c2) = rows
    return a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0)


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _hull_area2(pts):
    pts = sorted(set(pts))
    if len(pts) < 3:
        return 0
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return sum(hull[i][0] * hull[(i + 1) % len(hull)][1] - hull[(i + 1) % len(hull)][0] * hull[i][1]
               for i in range(len(hull)))


@st.composite
def integer_point_sets(draw):
    # small integer coordinates: many collinear and co-circular subsets, exact checks
    n = draw(st.integers(4, 60))
    span = draw(st.sampled_from([6, 12, 40, 1000]))
    pts = draw(st.lists(st.tuples(st.integers(0, span), st.integers(0, span)),
                        min_size=n, max_size=n, unique=True))
    return pts


@given(integer_point_sets())
def test_delaunay_empty_circumcircle(pts):
    if _hull_area2(pts) == 0:
        return
    tri = Delaunay(np.array(pts, float))
    simplices = tri.finite_simplices().tolist()
    area = 0
    for s in simplices:
        a, b, c = (pts[i] for i in s)
        o = _orient(a, b, c)
        assert o != 0
        area += abs(o)
        for q in range(len(pts)):
            if q in s:
                continue
            val = _incircle(a, b, c, pts[q])
            # strictly inside means sign(val) == sign(orientation)
            assert not (val != 0 and (val > 0) == (o > 0))
    # the triangles tile the convex hull
    assert area == _hull_area2(pts)


# -- valley amplitude ---------------------------------------------------------

sections = st.lists(st.floats(0, 10, allow_nan=False), min_size=2, max_size=40)


@given(sections, st.floats(1e-3, 1e3))
def test_valley_invariances(sec, alpha):
    f = np.array(sec)
    R = valley_amplitude(f)
    assert 0 <= R < 1
    assert math.isclose(valley_amplitude(f[::-1]), R, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(valley_amplitude(alpha * f), R, rel_tol=1e-9, abs_tol=1e-12)


@given(st.floats(-3, 3), st.floats(1, 5), st.integers(2, 40), st.floats(0.01, 10))
def test_valley_concave_is_zero(center, stretch, k, height):
    t = np.linspace(0, 1, k)
    # concave parabola kept non-negative on [0, 1]
    width = stretch * (1 + abs(center))
    f = height * (1 - ((t - center) / width) ** 2)
    assert valley_amplitude(f) == 0.0


@given(st.floats(0.2, 1), st.floats(0.2, 1), st.floats(0.08, 0.4), st.floats(0.08, 0.4), st.floats(0, 0.05))
def test_valley_against_finer_grid(a, b, s1, s2, base):
    def f(t):
        return a * np.exp(-0.5 * (t / s1) ** 2) + b * np.exp(-0.5 * ((t - 1) / s2) ** 2) + base
    coarse = valley_amplitude(f(np.linspace(0, 1, 10)))
    fine = valley_amplitude(f(np.linspace(0, 1, 91)))
    assert abs(coarse - fine) <= 0.05


# -- mode function --------------------------------------------------------------

@given(random_graphs(), st.integers(0, 10_000))
def test_mode_function_padded_balance(case, seed):
    n, edges, _ = case
    f = np.random.default_rng(seed).random(n)
    mf, tree, cores = scan(ConnectionGraph(n, edges, GraphType.DELAUNAY), f, n_grid=10)
    rep = mode_properties_check(mf)
    assert rep["increments"] == rep["decrements"]
    assert cores.M == len(tree.leaves)


def _mixture_quantiles(w, mu, sd, n):
    def cdf(x):
        return sum(wi * 0.5 * (1 + math.erf((x - m) / (s * math.sqrt(2)))) for wi, m, s in zip(w, mu, sd))
    lo0, hi0 = min(mu) - 10 * max(sd), max(mu) + 10 * max(sd)
    out = []
    for i in range(n):
        q = (i + 0.5) / n
        lo, hi = lo0, hi0
        for _ in range(60):
            mid = (lo + hi) / 2
            if cdf(mid) < q:
                lo = mid
            else:
                hi = mid
        out.append((lo + hi) / 2)
    return np.array(out)


@given(st.integers(1, 3), st.lists(st.floats(0.2, 1), min_size=3, max_size=3),
       st.lists(st.floats(0.5, 2), min_size=3, max_size=3), st.lists(st.floats(3, 9), min_size=2, max_size=2),
       st.integers(100, 250), st.floats(0.6, 1.0))
def test_mode_count_matches_fine_grid_maxima(k, w, sd, gaps, n, hmult):
    w = np.array(w[:k]) / sum(w[:k])
    sd = np.array(sd[:k])
    mu = np.cumsum(np.r_[0, [g * max(sd[i], sd[i + 1]) for i, g in enumerate(gaps[:k - 1])]])
    x = _mixture_quantiles(w, mu, sd, n)
    h = h_norm(x) * hmult
    f = kepdf(x, x, h=h).values
    # every order statistic is a level, so no birth falls between grid points
    mf, _, _ = scan(build_unidimensional(x), f, grid=np.arange(1, n + 1) / n)
    g = np.arange(x.min() - 3 * h[0], x.max() + 3 * h[0], h[0] / 20)
    fv = kepdf(g, x, h=h).values
    is_max = (fv[1:-1] > fv[:-2]) & (fv[1:-1] >= fv[2:])
    is_min = (fv[1:-1] < fv[:-2]) & (fv[1:-1] <= fv[2:])
    maxima = int(np.sum(is_max))
    # a bump shallower than the spacing of the sample can hide between two
    # observations; keep to modes standing 1% above their saddles
    peaks, dips = fv[1:-1][is_max], fv[1:-1][is_min]
    assume(all(min(peaks[i], peaks[i + 1]) >= 1.01 * dips[i] for i in range(len(dips))))
    assert mode_properties_check(mf)["increments"] == maxima


# -- adjusted Rand index --------------------------------------------------------

labelings = st.lists(st.integers(0, 4), min_size=2, max_size=60)


@given(labelings, st.data())
def test_ari_symmetry_permutation_identity(a, data):
    b = data.draw(st.lists(st.integers(0, 4), min_size=len(a), max_size=len(a)))
    perm = data.draw(st.permutations(range(5)))
    v = adj_rand_index(a, b)
    assert v <= 1 + 1e-12
    assert math.isclose(v, adj_rand_index(b, a), rel_tol=1e-12, abs_tol=1e-12)
    relabeled = [perm[x] for x in a]
    assert math.isclose(adj_rand_index(relabeled, b), v, rel_tol=1e-12, abs_tol=1e-12)
    assert adj_rand_index(a, relabeled) == 1.0


def test_ari_is_one_only_for_identical_partitions():
    assert adj_rand_index([1, 1, 2, 2, 3], [2, 2, 3, 3, 1]) == 1.0
    assert adj_rand_index([1, 1, 2, 2, 3], [1, 1, 2, 3, 3]) < 1.0


def test_ari_random_partitions_mean_near_zero():
    rng = np.random.default_rng(7)
    vals = [adj_rand_index(rng.integers(0, 3, 200), rng.integers(0, 3, 200)) for _ in range(N_CASES)]
    assert abs(np.mean(vals)) <= 0.05


# -- density-based silhouette ---------------------------------------------------

@given(st.integers(2, 4), st.integers(0, 10_000), st.data())
def test_dbs_bounds_and_permutation(M, seed, data):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(M, 40))
    lab = np.concatenate([np.arange(1, M + 1), rng.integers(1, M + 1, n - M)])
    dens = rng.random((n, M)) * rng.choice([1e-3, 1, 1e3], size=(n, M))
    pri = rng.random(M) + 0.1
    pri /= pri.sum()
    res = dbs_from_densities(dens, lab, pri)
    assert np.all(np.abs(res.values) <= 1)
    assert np.max(np.abs(res.values)) == 1.0
    perm = np.array(data.draw(st.permutations(range(M))))
    # class m becomes class perm[m]
    dens2 = np.empty_like(dens)
    dens2[:, perm] = dens
    pri2 = np.empty_like(pri)
    pri2[perm] = pri
    res2 = dbs_from_densities(dens2, perm[lab - 1] + 1, pri2)
    np.testing.assert_allclose(res2.values, res.values, rtol=1e-12, atol=1e-15)


# -- classical scaling ---------------------------------------------------------------

@given(st.integers(1, 3), st.integers(5, 30), st.integers(0, 10_000))
def test_mds_reconstructs_distances(k, n, seed):
    P = np.random.default_rng(seed).normal(size=(n, k)) * 3
    D = np.sqrt(((P[:, None] - P[None]) ** 2).sum(-1))
    X = classical_mds(D, k)
    D2 = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    assert np.max(np.abs(D2 - D)) <= 1e-8


# -- end-to-end determinism across thread counts ------------------------------

@st.composite
def small_runs(draw):
    gtype, d = draw(st.sampled_from([("pairs", 2), ("pairs", 4), ("delaunay", 2), ("delaunay", 3),
                                     ("unidimensional", 1)]))
    # pairs runs exceed one block of segment evaluations so the split matters
    n = draw(st.integers(70, 90)) if gtype == "pairs" else draw(st.integers(30, 120))
    seed = draw(st.integers(0, 10_000))
    kernel = draw(st.sampled_from(["gaussian", "t7"]))
    bwtype = draw(st.sampled_from(["fixed", "adaptive"]))
    return gtype, d, n, seed, kernel, bwtype


def _run_bytes(root, args):
    from densitree.cli import main
    assert main(args + ["--out", str(root), "-q"]) == 0
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


@given(small_runs())
def test_threads_never_change_artifacts(case):
    import tempfile
    from pathlib import Path

    from densitree.artifacts import write_csv
    gtype, d, n, seed, kernel, bwtype = case
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, 4, (3, d))
    x = centers[rng.integers(0, 3, n)] + rng.normal(size=(n, d))
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        write_csv(tmp / "x.csv", [f"v{j}" for j in range(d)], x.tolist())
        outs = []
        for t in (1, 4, 8):
            args = ["--threads", str(t), "cluster", "--data", str(tmp / "x.csv"), "--graphtype", gtype,
                    "--kernel", kernel, "--bwtype", bwtype]
            outs.append(_run_bytes(tmp / f"run{t}", args))
    assert outs[0] == outs[1] == outs[2]
    assert "labels.csv" in outs[0] and ("amplitudes.bin" in outs[0]) == (gtype == "pairs")
