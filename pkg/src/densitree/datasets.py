"""Bundled example data."""

from __future__ import annotations

from importlib import resources

import numpy as np

__all__ = ["WINE_SUBSET", "load_wine"]

WINE_SUBSET = ("Alcohol", "Alcalinity", "Flavanoids")


def load_wine(subset: bool = False):
    """Wine recognition data: 178 wines, 13 chemical measurements, 3 cultivars.

    Returns ``(names, X, cultivar)``; with ``subset`` only Alcohol,
    Alcalinity and Flavanoids are kept.
    """
    path = resources.files("densitree") / "data" / "wine.csv"
    with resources.as_file(path) as p:
        header = p.read_text().splitlines()[0].split(",")
        raw = np.loadtxt(p, delimiter=",", skiprows=1)
    names = header[1:]
    X = raw[:, 1:]
    if subset:
        idx = [names.index(c) for c in WINE_SUBSET]
        names = list(WINE_SUBSET)
        X = X[:, idx]
    return list(names), X, raw[:, 0].astype(np.int64)
