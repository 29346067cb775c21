"""Histogram-binned gradient-boosted regression trees.

Split into three layers: `binning` maps raw feature columns to small
integer bins at value-rank quantiles, `tree` grows one regression tree
leaf-wise over binned columns, and `booster` runs the boosting loop with
row bagging, per-tree feature sampling, and JSON model persistence.
"""

from .binning import MISSING_BIN, BinMapper, ColumnBins, build_column_bins
from .booster import (
    GBDTModel,
    GBDTParams,
    fit,
    load_model,
    model_from_dict,
    model_to_dict,
    model_to_json,
    predict,
    save_model,
)
from .tree import LeafNode, SplitNode, Tree

__all__ = [
    "MISSING_BIN",
    "BinMapper",
    "ColumnBins",
    "build_column_bins",
    "GBDTModel",
    "GBDTParams",
    "fit",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "model_to_json",
    "predict",
    "save_model",
    "LeafNode",
    "SplitNode",
    "Tree",
]
