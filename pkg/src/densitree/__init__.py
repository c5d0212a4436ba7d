"""Clustering by the level sets of a kernel density estimate."""

__version__ = "0.1.0"

from .classify import ClassificationConfig, classify, log_ratio, se_weighted_ratio
from .datasets import load_wine
from .diagnostics import DbsResult, adj_rand_index, dbs
from .graph import (ConnectionGraph, GraphType, build_delaunay, build_pairs, build_unidimensional,
                    connected_components, rethreshold, valley_amplitude)
from .kde import DegenerateDataError, DensityEstimate, KernelKind, eval_segment, h_norm, hprop2f, kepdf
from .levelset import ClusterTree, CoreAssignment, ModeFunction, level_set, mode_properties_check, scan
from .mixed import ColumnType, MixedTable, classical_mds, gower
from .pipeline import ClusterResult, RunConfig, pdf_cluster, recluster

__all__ = [
    "ClassificationConfig", "ClusterResult", "ClusterTree", "ColumnType", "ConnectionGraph",
    "CoreAssignment", "DbsResult", "DegenerateDataError", "DensityEstimate", "GraphType",
    "KernelKind", "MixedTable", "ModeFunction", "RunConfig", "adj_rand_index", "build_delaunay",
    "build_pairs", "build_unidimensional", "classical_mds", "classify", "connected_components",
    "dbs", "eval_segment", "gower", "h_norm", "hprop2f", "kepdf", "level_set", "load_wine", "log_ratio",
    "mode_properties_check", "pdf_cluster", "recluster", "rethreshold", "scan",
    "se_weighted_ratio", "valley_amplitude",
]
