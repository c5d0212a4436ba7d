"""Static SVG figures drawn from the files of a run directory."""

from __future__ import annotations

import json
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .artifacts import read_labels, read_numeric_csv, read_table

__all__ = ["plot_dbs", "plot_mode_function", "plot_scatter_matrix", "plot_tree", "render"]

PALETTE = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
           "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b2df8a"]


def _color(label: int) -> str:
    return PALETTE[(label - 1) % len(PALETTE)] if label > 0 else "#bbbbbb"


class _Svg:
    def __init__(self, width, height):
        self.w, self.h = width, height
        self.parts = []

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0):
        self.parts.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                          f'stroke="{stroke}" stroke-width="{width}"/>')

    def polyline(self, pts, stroke="#000", width=1.5):
        s = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        self.parts.append(f'<polyline points="{s}" fill="none" stroke="{stroke}" stroke-width="{width}"/>')

    def rect(self, x, y, w, h, fill="#000", stroke="none"):
        self.parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" '
                          f'fill="{fill}" stroke="{stroke}"/>')

    def circle(self, x, y, r, fill):
        self.parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{fill}"/>')

    def text(self, x, y, s, size=11, anchor="middle"):
        self.parts.append(f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" font-family="sans-serif" '
                          f'text-anchor="{anchor}">{escape(str(s))}</text>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">')
        return "\n".join([head, f'<rect width="{self.w}" height="{self.h}" fill="#fff"/>',
                          *self.parts, "</svg>"]) + "\n"


def _axes(svg, x0, y0, x1, y1, xlab, ylab, yticks):
    svg.line(x0, y1, x1, y1)
    svg.line(x0, y0, x0, y1)
    svg.text((x0 + x1) / 2, y1 + 32, xlab)
    svg.text(x0 - 34, (y0 + y1) / 2, ylab)
    for val, y in yticks:
        svg.line(x0 - 4, y, x0, y)
        svg.text(x0 - 7, y + 4, val, size=10, anchor="end")


def plot_mode_function(run_dir) -> str:
    _, body = read_table(Path(run_dir) / "modefn.csv")
    p = np.array([float(c[0]) for _, c in body])
    m = np.array([int(c[1]) for _, c in body])
    svg = _Svg(520, 340)
    x0, y0, x1, y1 = 60, 20, 500, 290
    top = max(int(m.max()), 1) + 1
    sx = lambda v: x0 + v * (x1 - x0)
    sy = lambda v: y1 - v / top * (y1 - y0)
    # step function, zero at both ends
    edges = np.concatenate([[0.0], (p[1:] + p[:-1]) / 2, [1.0]])
    pts = [(sx(0), sy(0))]
    for k in range(len(m)):
        pts += [(sx(edges[k]), sy(m[k])), (sx(edges[k + 1]), sy(m[k]))]
    pts.append((sx(1), sy(0)))
    _axes(svg, x0, y0, x1, y1, "fraction of data points included", "m(p)",
          [(str(k), sy(k)) for k in range(top + 1)])
    for t in (0, 0.25, 0.5, 0.75, 1):
        svg.text(sx(t), y1 + 15, f"{t:g}", size=10)
    svg.polyline(pts)
    return svg.render()


def plot_tree(run_dir) -> str:
    tree = json.loads((Path(run_dir) / "tree.json").read_text())
    leaves = []

    def collect(nd):
        if "label" in nd:
            leaves.append(nd)
        for c in nd.get("children", []):
            collect(c)

    collect(tree)
    svg = _Svg(max(320, 60 * len(leaves) + 80), 360)
    x0, y0, x1, y1 = 60, 20, svg.w - 20, 310
    sy = lambda h: y1 - h * (y1 - y0)
    step = (x1 - x0) / max(len(leaves), 1)
    pos = {id(nd): x0 + step * (k + 0.5) for k, nd in enumerate(leaves)}

    def draw(nd):
        if "label" in nd:
            x = pos[id(nd)]
            svg.line(x, sy(nd["height"]), x, y1)
            svg.text(x, y1 + 15, nd["label"])
            return x
        xs = [draw(c) for c in nd["children"]]
        y = sy(nd["height"])
        for c, x in zip(nd["children"], xs):
            svg.line(x, sy(c["height"]), x, y)
        svg.line(min(xs), y, max(xs), y)
        return sum(xs) / len(xs)

    xr = draw(tree)
    svg.line(xr, sy(1.0), xr, y0)
    _axes(svg, x0 - 10, y0, x1, y1 + 25, "", "h",
          [(f"{t:g}", sy(t)) for t in (0, 0.25, 0.5, 0.75, 1)])
    return svg.render()


def plot_scatter_matrix(run_dir, max_vars: int = 6) -> str:
    names, x = read_numeric_csv(Path(run_dir) / "data.csv")
    lab = read_labels(Path(run_dir) / "labels.csv")
    d = min(x.shape[1], max_vars)
    cell, pad = 150, 30
    svg = _Svg(pad + d * cell, pad + d * cell)
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    for a in range(d):
        for b in range(d):
            ox, oy = pad + b * cell, pad + a * cell
            svg.rect(ox + 4, oy + 4, cell - 8, cell - 8, fill="none", stroke="#999")
            if a == b:
                svg.text(ox + cell / 2, oy + cell / 2, names[a], size=12)
                continue
            u = (x[:, b] - lo[b]) / span[b]
            v = (x[:, a] - lo[a]) / span[a]
            for i in range(len(x)):
                svg.circle(ox + 8 + u[i] * (cell - 16), oy + cell - 8 - v[i] * (cell - 16), 1.8,
                           _color(int(lab[i])))
    return svg.render()


def plot_dbs(run_dir) -> str:
    _, body = read_table(Path(run_dir) / "dbs.csv")
    rows = [(int(c[1]), float(c[2])) for _, c in body]
    svg = _Svg(620, 340)
    x0, y0, x1, y1 = 60, 20, 600, 290
    mid = (y0 + y1) / 2
    sy = lambda v: mid - v * (y1 - y0) / 2
    _axes(svg, x0, y0, x1, y1, "observations sorted by cluster and dbs", "dbs",
          [(f"{t:g}", sy(t)) for t in (-1, -0.5, 0, 0.5, 1)])
    svg.line(x0, mid, x1, mid, stroke="#999")
    if rows:
        w = (x1 - x0) / len(rows)
        for k, (label, v) in enumerate(rows):
            top = min(sy(v), mid)
            svg.rect(x0 + k * w, top, max(w, 0.5), abs(sy(v) - mid), fill=_color(label))
    return svg.render()


_PLOTS = {1: ("modefn.svg", plot_mode_function), 2: ("tree.svg", plot_tree),
          3: ("scatter.svg", plot_scatter_matrix), 4: ("dbs.svg", plot_dbs)}


def render(run_dir, which=(1, 2, 3, 4), out_dir=None) -> list:
    """Write the requested figures and return their paths."""
    out = Path(out_dir or run_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for w in which:
        if w not in _PLOTS:
            raise ValueError(f"unknown plot {w}; choose from 1-4")
        name, fn = _PLOTS[w]
        path = out / name
        path.write_text(fn(run_dir))
        paths.append(path)
    return paths
