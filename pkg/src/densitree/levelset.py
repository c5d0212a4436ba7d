"""Level-set scanning: mode function, cluster tree and cluster cores."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import ConnectionGraph, connected_components

__all__ = [
    "ClusterTree",
    "CoreAssignment",
    "ModeFunction",
    "TreeNode",
    "level_set",
    "mode_properties_check",
    "p_grid",
    "scan",
]


@dataclass
class ModeFunction:
    grid: np.ndarray
    counts: np.ndarray


@dataclass
class TreeNode:
    id: int
    height: float
    children: list = field(default_factory=list)
    label: int | None = None
    core_size: int = 0
    founder: int | None = None
    peak: float = 0.0


@dataclass
class ClusterTree:
    nodes: list
    root: int

    @property
    def leaves(self) -> list:
        return sorted((nd for nd in self.nodes if nd.label is not None), key=lambda nd: nd.label)

    def n_leaves(self, node_id: int) -> int:
        nd = self.nodes[node_id]
        if nd.label is not None:
            return 1
        return sum(self.n_leaves(c) for c in nd.children)

    def _min_label(self, node_id: int) -> int:
        nd = self.nodes[node_id]
        if nd.label is not None:
            return nd.label
        return min(self._min_label(c) for c in nd.children)

    def ordered_children(self, node_id: int) -> list:
        return sorted(self.nodes[node_id].children, key=self._min_label)

    def to_dict(self) -> dict:
        def walk(i):
            nd = self.nodes[i]
            out = {"height": nd.height, "members": self.n_leaves(i)}
            if nd.label is not None:
                out["label"] = nd.label
                out["core_size"] = nd.core_size
            else:
                out["children"] = [walk(c) for c in self.ordered_children(i)]
            return out

        return walk(self.root)

    def to_text(self) -> str:
        lines = []

        def walk(i, prefix, branch, child_prefix):
            nd = self.nodes[i]
            if nd.label is not None:
                lines.append(f'{prefix}{branch}leaf "{nd.label}" (h= {nd.height:.4g})')
                return
            kids = self.ordered_children(i)
            lines.append(f"{prefix}{branch}[dendrogram w/ {len(kids)} branches and "
                         f"{self.n_leaves(i)} members at h = {nd.height:.4g}]")
            for k, c in enumerate(kids):
                if k == len(kids) - 1:
                    walk(c, child_prefix, "`--", child_prefix + "   ")
                else:
                    walk(c, child_prefix, "|--", child_prefix + "|  ")

        walk(self.root, "", "--", "  ")
        return "\n".join(lines) + "\n"


@dataclass
class CoreAssignment:
    labels: np.ndarray  # 0 marks unallocated
    M: int

    @property
    def unallocated(self) -> np.ndarray:
        return np.flatnonzero(self.labels == 0)

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.M + 1)[1:]


def level_set(densities, c: float):
    """Indices with density >= c and the fraction of the sample they hold."""
    f = np.asarray(densities, dtype=float)
    idx = np.flatnonzero(f >= c)
    return idx, len(idx) / len(f)


def p_grid(n_grid: int) -> np.ndarray:
    """Equispaced probability levels k / (n_grid + 1), k = 1..n_grid."""
    return np.arange(1, n_grid + 1) / (n_grid + 1)


def mode_properties_check(mf: ModeFunction) -> dict:
    """Total increments and decrements of the zero-padded mode function."""
    padded = np.concatenate([[0], np.asarray(mf.counts, dtype=np.int64), [0]])
    diff = np.diff(padded)
    return {"increments": int(np.sum(np.maximum(diff, 0))),
            "decrements": int(np.sum(np.maximum(-diff, 0)))}


def scan(graph: ConnectionGraph, densities, n_grid: int = 50, grid=None):
    """Track level-set components over a grid of sample proportions.

    Returns ``(ModeFunction, ClusterTree, CoreAssignment)``. At each grid
    value p the threshold is the ceil(p n)-th largest density. Components
    that meet no tracked group found a leaf; components meeting one group
    extend it; components meeting several close them under a new node.
    """
    f = np.asarray(densities, dtype=float)
    n = len(f)
    if graph.n != n:
        raise ValueError(f"graph has {graph.n} vertices but {n} densities were given")
    if grid is None:
        if n_grid < 2:
            raise ValueError("n_grid must be at least 2")
        grid = p_grid(n_grid)
    grid = np.asarray(grid, dtype=float)
    desc = np.sort(f)[::-1]

    nodes: list[TreeNode] = []
    open_leaf: dict[int, bool] = {}
    cores: dict[int, np.ndarray] = {}
    node_of = np.full(n, -1, dtype=np.int64)
    counts = np.zeros(len(grid), dtype=np.int64)

    for k, p in enumerate(grid):
        rank = min(max(math.ceil(p * n), 1), n)
        active = f >= desc[rank - 1]
        comp = connected_components(graph, active)
        ncomp = int(comp.max()) + 1 if active.any() else 0
        counts[k] = ncomp
        order = np.argsort(comp, kind="stable")
        bounds = np.searchsorted(comp[order], np.arange(ncomp + 1))
        new_node_of = np.full(n, -1, dtype=np.int64)
        for c in range(ncomp):
            members = order[bounds[c]:bounds[c + 1]]
            prev = np.unique(node_of[members])
            prev = prev[prev >= 0]
            if len(prev) == 0:
                top = int(members[np.argmax(f[members])])
                nd = TreeNode(id=len(nodes), height=float(p), founder=top, peak=float(f[top]))
                nodes.append(nd)
                open_leaf[nd.id] = True
                cores[nd.id] = members
                target = nd.id
            elif len(prev) == 1:
                target = int(prev[0])
                if open_leaf.get(target):
                    cores[target] = members
            else:
                nd = TreeNode(id=len(nodes), height=float(p), children=[int(v) for v in prev])
                nodes.append(nd)
                for v in prev:
                    if int(v) in open_leaf:
                        open_leaf[int(v)] = False
                target = nd.id
            new_node_of[members] = target
        node_of = new_node_of

    tops = sorted(set(node_of[node_of >= 0].tolist()))
    root = TreeNode(id=len(nodes), height=1.0, children=tops)
    nodes.append(root)

    leaf_ids = sorted(open_leaf, key=lambda i: (-nodes[i].peak, nodes[i].founder))
    labels = np.zeros(n, dtype=np.int64)
    for lab, i in enumerate(leaf_ids, start=1):
        nodes[i].label = lab
        nodes[i].core_size = len(cores[i])
        labels[cores[i]] = lab
    tree = ClusterTree(nodes=nodes, root=root.id)
    return ModeFunction(grid=grid, counts=counts), tree, CoreAssignment(labels=labels, M=len(leaf_ids))
