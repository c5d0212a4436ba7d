"""Command-line interface: ``densitree <command> ...``.

Exit codes: 0 success, 2 bad input or arguments, 3 degenerate data or
missing run files, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import (InputError, fmt, read_amplitudes, read_labels, read_numeric_csv,
                        read_table, write_csv, write_run)
from .datasets import load_wine
from .delaunay import TriangulationError
from .diagnostics import adj_rand_index, dbs
from .graph import ConnectionGraph, GraphType, rethreshold
from .kde import DegenerateDataError, KernelKind, h_norm, hprop2f, kepdf
from .mixed import MixedTable, classical_mds, gower
from .pipeline import RunConfig, finish, pdf_cluster
from .plots import render

EXIT_USAGE, EXIT_DEGENERATE, EXIT_INTERNAL = 2, 3, 4


class UsageError(Exception):
    pass


class MissingRunFile(Exception):
    pass


def _names(s):
    return [c.strip() for c in s.split(",") if c.strip()] if s else None


def _floats(s):
    try:
        return [float(v) for v in s.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _lambda(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("lambda must lie in (0, 1)")
    return v


def _positive_int(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _load_data(args):
    return read_numeric_csv(args.data, _names(args.columns), _names(args.drop))


# -- commands ---------------------------------------------------------------

_FLAG_FIELDS = {"graphtype": "graphtype", "lam": "lam", "kernel": "kernel", "bwtype": "bwtype",
                "hmult": "hmult", "n_grid": "n_grid", "grid_pairs": "grid_pairs",
                "n_stage": "n_stage", "se": "se", "hcores": "hcores",
                "standardize_delaunay": "standardize_delaunay"}


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            cfg = RunConfig.from_dict(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    explicit = {f: getattr(args, a) for a, f in _FLAG_FIELDS.items() if getattr(args, a) is not None}
    return replace(cfg, **explicit).validate()


def _summary(res, names) -> str:
    x = res.data
    cfg = res.config
    lines = [f"Clustering of {len(x)} observations on {x.shape[1]} variables: {', '.join(names)}",
             f"graph: {cfg.graphtype}" + (f" (lambda = {fmt(cfg.lam)})" if cfg.graphtype == "pairs" else ""),
             f"kernel: {cfg.kernel}, bandwidth: {cfg.bwtype}, hmult = {fmt(cfg.hmult)}", ""]
    counts = res.cores.counts()
    na = int(np.sum(res.cores.labels == 0))
    lines += ["Initial groupings:",
              " label: " + " ".join(str(k) for k in range(1, res.M + 1)) + " NA",
              " count: " + " ".join(str(int(c)) for c in counts) + f" {na}", ""]
    if np.all(res.labels > 0):
        final = np.bincount(res.labels, minlength=res.M + 1)[1:]
        lines += ["Final groupings:",
                  " label: " + " ".join(str(k) for k in range(1, res.M + 1)),
                  " count: " + " ".join(str(int(c)) for c in final), ""]
    lines += ["Groups tree:", res.tree.to_text()]
    return "\n".join(lines)


def cmd_cluster(args):
    names, x = _load_data(args)
    cfg = _config_from_args(args)
    if len(x) > 1:
        flat = np.flatnonzero(np.ptp(x, axis=0) == 0)
        if flat.size:
            raise DegenerateDataError(f"column {names[flat[0]]!r} is constant")
    res = pdf_cluster(x, cfg, threads=args.threads)
    write_run(args.out, res, names)
    if not args.quiet:
        print(_summary(res, names), end="")
    return 0


def cmd_rethreshold(args):
    run = Path(args.run_dir)
    for name in ("params.json", "data.csv", "density.csv"):
        if not (run / name).exists():
            raise MissingRunFile(f"{run / name} not found")
    cfg = RunConfig.from_dict(json.loads((run / "params.json").read_text()))
    if cfg.graphtype != "pairs":
        raise UsageError("rethreshold needs a run that used the pairs graph")
    amp_path = run / "amplitudes.bin"
    if not amp_path.exists():
        raise MissingRunFile(f"{amp_path} not found")
    amps, n, gp, kernel = read_amplitudes(amp_path)
    names, x = read_numeric_csv(run / "data.csv")
    _, dens = read_numeric_csv(run / "density.csv", columns=["density"])
    if len(x) != n or len(dens) != n:
        raise InputError(f"{run}: amplitude file is for n = {n}, data has {len(x)} rows")
    if kernel is not KernelKind(cfg.kernel) or gp != cfg.grid_pairs:
        raise InputError(f"{run}: amplitude file does not match params.json")
    cfg = replace(cfg, lam=args.lam).resolved(x.shape[1])
    base = ConnectionGraph(n, np.zeros((0, 2)), GraphType.PAIRS, amplitudes=amps, grid_pairs=gp)
    graph = rethreshold(base, cfg.lam)
    res = finish(x, dens[:, 0], graph, cfg, h_norm(x) * cfg.hmult, args.threads)
    write_run(args.out or run, res, names)
    if not args.quiet:
        print(_summary(res, names), end="")
    return 0


def cmd_density(args):
    names, x = _load_data(args)
    kernel = KernelKind(args.kernel)
    if args.h is not None:
        h = np.asarray(args.h, dtype=float)
        if len(h) != x.shape[1]:
            raise UsageError(f"--h needs {x.shape[1]} values")
    else:
        h = h_norm(x) * args.hmult
        if args.bwtype == "adaptive":
            h = hprop2f(x, h_norm(x)) * args.hmult
    if args.pair:
        pair = _names(args.pair)
        if len(pair) != 2 or any(p not in names for p in pair):
            raise UsageError("--pair needs two column names of the data")
        cols = [names.index(p) for p in pair]
        sub = x[:, cols]
        hs = h[:, cols] if np.ndim(h) == 2 else h[cols]
        reach = 3 * (hs.max(axis=0) if np.ndim(hs) == 2 else hs)
        axes = [np.linspace(sub[:, k].min() - reach[k], sub[:, k].max() + reach[k], args.grid)
                for k in range(2)]
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        vals = kepdf(pts, sub, kernel, hs, args.threads).values
        header = pair + ["density"]
    else:
        if args.eval:
            enames, pts = read_numeric_csv(args.eval, names if set(names) <= set(read_table(args.eval)[0]) else None)
            if pts.shape[1] != x.shape[1]:
                raise UsageError(f"eval file has {pts.shape[1]} columns, data has {x.shape[1]}")
        else:
            pts = x
        vals = kepdf(pts, x, kernel, h, args.threads).values
        header = names + ["density"]
    rows = (list(p) + [v] for p, v in zip(pts.tolist(), vals.tolist()))
    write_csv(args.out, header, rows)
    return 0


def cmd_dbs(args):
    names, x = _load_data(args)
    labels = read_labels(args.labels)
    if len(labels) != len(x):
        raise UsageError(f"{len(labels)} labels for {len(x)} observations")
    hmult = args.hmult if args.hmult is not None else (0.75 if x.shape[1] <= 6 else 1.0)
    res = dbs(x, labels, args.priors, args.kernel, hmult, args.threads)
    write_csv(args.out, ["index", "label", "dbs"], res.sorted_rows())
    return 0


def cmd_ari(args):
    a = read_labels(args.a)
    b = read_labels(args.b)
    if len(a) != len(b):
        raise UsageError(f"label files differ in length ({len(a)} vs {len(b)})")
    print(fmt(adj_rand_index(a, b)))
    return 0


def _read_types(path):
    try:
        manifest = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read column types {path}: {exc}") from exc
    if not isinstance(manifest, dict) or not manifest:
        raise UsageError("column-type manifest must be a non-empty JSON object")
    types, levels = {}, {}
    for name, v in manifest.items():
        if isinstance(v, dict):
            types[name] = v.get("type")
            if "levels" in v:
                levels[name] = int(v["levels"])
        else:
            types[name] = v
    return types, levels


def cmd_mds(args):
    header, body = read_table(args.table)
    types, levels = _read_types(args.types)
    missing = [c for c in types if c not in header]
    if missing:
        raise UsageError(f"manifest column {missing[0]!r} not in table")
    cols = [c for c in header if c in types]
    columns = [[cells[header.index(c)] for _, cells in body] for c in cols]
    for c, col in zip(cols, columns):
        if types[c] in ("numeric", "ordratio", "symm", "asymm"):
            for (lineno, _), v in zip(body, col):
                if v not in ("", "NA"):
                    try:
                        float(v)
                    except ValueError:
                        raise InputError(f"{args.table}: line {lineno}: column {c!r}: "
                                         f"not a number: {v!r}") from None
    columns = [[None if v in ("", "NA") else (float(v) if types[c] != "nominal" else v) for v in col]
               for c, col in zip(cols, columns)]
    table = MixedTable(columns, [types[c] for c in cols], cols, levels)
    coords = classical_mds(gower(table), args.k)
    out_names = [f"MDS{k + 1}" for k in range(args.k)]
    if args.append:
        extra_names, extra = read_numeric_csv(args.table, _names(args.append))
        coords = np.column_stack([coords, extra])
        out_names += extra_names
    write_csv(args.out, out_names, coords.tolist())
    return 0


def cmd_plot(args):
    try:
        which = [int(w) for w in args.which.split(",")]
    except ValueError:
        raise UsageError("--which takes numbers from 1 to 4") from None
    for w in which:
        if w not in (1, 2, 3, 4):
            raise UsageError("--which takes numbers from 1 to 4")
    for p in render(args.run_dir, which, args.out):
        print(p)
    return 0


def cmd_dataset(args):
    if args.name == "wine":
        names, X, y = load_wine()
        header, rows = ["Type"] + names, (np.column_stack([y, X])).tolist()
        rows = [[int(r[0])] + r[1:] for r in rows]
    elif args.name == "wine-full":
        header, X, _ = load_wine()
        rows = X.tolist()
    elif args.name == "wine-sub":
        header, X, _ = load_wine(subset=True)
        rows = X.tolist()
    else:
        _, X, y = load_wine()
        header, rows = ["index", "label"], [[i, int(v)] for i, v in enumerate(y)]
    write_csv(args.out, header, rows)
    return 0


# -- parser -----------------------------------------------------------------

def _add_data(p):
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--columns", help="comma-separated columns to use (default: all)")
    p.add_argument("--drop", help="comma-separated columns to leave out")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="densitree", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--threads", type=_positive_int, default=None,
                    help="worker threads (default: $DENSITREE_THREADS or 1); never changes results")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a numeric CSV and write a run directory")
    _add_data(p)
    p.add_argument("--out", default="run", help="run directory (default: run)")
    p.add_argument("--config", help="params.json of an earlier run; explicit flags override it")
    p.add_argument("--graphtype", choices=["auto", "unidimensional", "delaunay", "pairs"],
                   help="auto picks unidimensional for d = 1, delaunay for d = 2 or 3, pairs otherwise")
    p.add_argument("--lambda", dest="lam", type=_lambda, help="valley tolerance for pairs (default 0.1)")
    p.add_argument("--kernel", choices=["gaussian", "t7"])
    p.add_argument("--bwtype", choices=["fixed", "adaptive"])
    p.add_argument("--hmult", type=float, help="bandwidth multiplier (default 0.75 if d <= 6, else 1)")
    p.add_argument("--n-grid", dest="n_grid", type=_positive_int, help="level-set grid size (default 50)")
    p.add_argument("--grid-pairs", dest="grid_pairs", type=_positive_int,
                   help="points per segment for pairs (default 10)")
    p.add_argument("--n-stage", dest="n_stage", type=int, help="classification blocks; 0 stops at cores")
    p.add_argument("--se", dest="se", action="store_true", default=None)
    p.add_argument("--no-se", dest="se", action="store_false")
    p.add_argument("--hcores", dest="hcores", action="store_true", default=None,
                   help="classify with the clustering bandwidth instead of per-cluster ones")
    p.add_argument("--no-hcores", dest="hcores", action="store_false")
    p.add_argument("--raw-delaunay", dest="standardize_delaunay", action="store_false", default=None,
                   help="triangulate raw coordinates instead of standardized ones")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("rethreshold", help="re-cut a pairs run at a new lambda without new densities")
    p.add_argument("run_dir")
    p.add_argument("--lambda", dest="lam", type=_lambda, required=True)
    p.add_argument("--out", help="output directory (default: overwrite run_dir)")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_rethreshold)

    p = sub.add_parser("density", help="kernel density estimate at the data, a file or a pair grid")
    _add_data(p)
    p.add_argument("--kernel", choices=["gaussian", "t7"], default="gaussian")
    p.add_argument("--bwtype", choices=["fixed", "adaptive"], default="fixed")
    p.add_argument("--hmult", type=float, default=1.0)
    p.add_argument("--h", type=_floats, help="explicit bandwidth vector, comma-separated")
    p.add_argument("--eval", help="CSV of evaluation points (default: the data)")
    p.add_argument("--pair", help="two column names: evaluate their bivariate marginal on a grid")
    p.add_argument("--grid", type=_positive_int, default=50, help="grid points per axis for --pair")
    p.add_argument("--out", default="density.csv")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("dbs", help="density-based silhouette of a given partition")
    _add_data(p)
    p.add_argument("--labels", required=True, help="CSV with a 'label' column")
    p.add_argument("--priors", type=_floats)
    p.add_argument("--kernel", choices=["gaussian", "t7"], default="gaussian")
    p.add_argument("--hmult", type=float)
    p.add_argument("--out", default="dbs.csv")
    p.set_defaults(func=cmd_dbs)

    p = sub.add_parser("ari", help="adjusted Rand index between two label files")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_ari)

    p = sub.add_parser("mds", help="Gower dissimilarity + classical scaling of a mixed-type table")
    p.add_argument("--table", required=True)
    p.add_argument("--types", required=True, help="JSON manifest: column -> type")
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--append", help="numeric columns to append to the coordinates")
    p.add_argument("--out", default="coords.csv")
    p.set_defaults(func=cmd_mds)

    p = sub.add_parser("plot", help="SVG figures of a run directory")
    p.add_argument("run_dir")
    p.add_argument("--which", default="1,2,3,4",
                   help="1 mode function, 2 tree, 3 scatterplot matrix, 4 silhouette")
    p.add_argument("--out", help="output directory (default: run_dir)")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("dataset", help="write a bundled dataset as CSV")
    p.add_argument("name", choices=["wine", "wine-full", "wine-sub", "wine-class"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dataset)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InputError, UsageError) as exc:
        print(f"densitree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateDataError, TriangulationError, MissingRunFile) as exc:
        print(f"densitree: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"densitree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"densitree: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
