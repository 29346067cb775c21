"""Boosting loop, sampling schedules, and JSON model persistence.

Training is deterministic by construction: every iteration m seeds its own
generator as seed + m, draws the row bag first (only on refresh
iterations) and the feature subset second, and all reductions run in fixed
order, so models are bit-identical across runs and across histogram worker
counts. Model files are canonical JSON (sorted keys, no whitespace) so the
same model always serializes to the same bytes.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, DataError, FormatError, TrainError
from ..rng import XorShift64
from .binning import BinMapper
from .tree import LeafNode, Node, SplitNode, Tree, grow_tree


@dataclass(frozen=True)
class GBDTParams:
    num_iterations: int = 4800
    learning_rate: float = 0.0035
    num_leaves: int = 11
    max_depth: int = 7
    min_data_in_leaf: int = 7
    lambda_l2: float = 0.0175
    bagging_freq: int = 5
    bagging_fraction: float = 0.66
    feature_fraction: float = 0.09
    max_bin: int = 64
    min_data_in_bin: int = 10
    seed: int = 0

    def __post_init__(self):
        checks = [
            (self.num_iterations >= 0, "num_iterations must be >= 0"),
            (self.learning_rate > 0, "learning_rate must be > 0"),
            (self.num_leaves >= 2, "num_leaves must be >= 2"),
            (self.max_depth >= 1, "max_depth must be >= 1"),
            (self.min_data_in_leaf >= 1, "min_data_in_leaf must be >= 1"),
            (self.lambda_l2 >= 0, "lambda_l2 must be >= 0"),
            (self.bagging_freq >= 0, "bagging_freq must be >= 0"),
            (0 < self.bagging_fraction <= 1, "bagging_fraction must be in (0, 1]"),
            (0 < self.feature_fraction <= 1, "feature_fraction must be in (0, 1]"),
            (self.max_bin >= 2, "max_bin must be >= 2"),
            (self.min_data_in_bin >= 1, "min_data_in_bin must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigurationError(message)

    @classmethod
    def from_dict(cls, d: dict) -> "GBDTParams":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigurationError(f"unknown parameter(s): {unknown}")
        return cls(**d)


@dataclass(frozen=True)
class GBDTModel:
    params: GBDTParams
    feature_names: tuple[str, ...]
    mapper: BinMapper
    base_score: float
    trees: tuple[Tree, ...]
    schema: Optional[dict] = None  # opaque featurization schema, carried for CLI predict


def fit(
    X: np.ndarray,
    y: np.ndarray,
    params: GBDTParams,
    feature_names: Optional[Sequence[str]] = None,
    n_workers: int = 1,
    loss_out: Optional[list] = None,
    schema: Optional[dict] = None,
) -> GBDTModel:
    """Train on a raw float matrix (NaN = missing) and a gold vector.

    loss_out, when given, receives the full-data mean squared error after
    every iteration.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise TrainError(f"feature matrix must be 2-d, got shape {X.shape}")
    n, n_features = X.shape
    if len(y) != n:
        raise TrainError(f"{n} rows but {len(y)} gold scores")
    if n < 2:
        raise TrainError("training needs at least 2 labeled rows")
    if n_features < 1:
        raise TrainError("training needs at least 1 feature column")
    if not np.all(np.isfinite(y)):
        raise DataError("gold scores must be finite")
    if feature_names is None:
        feature_names = tuple(f"f{j}" for j in range(n_features))
    feature_names = tuple(feature_names)
    if len(feature_names) != n_features:
        raise ConfigurationError(
            f"{len(feature_names)} feature names for {n_features} columns")

    mapper = BinMapper.fit(X, params.max_bin, params.min_data_in_bin)
    binned = mapper.bin_matrix(X)
    n_bins = [col.n_bins for col in mapper.columns]

    base_score = float(np.mean(y))
    preds = np.full(n, base_score)
    all_rows = np.arange(n)
    all_features = list(range(n_features))

    bagging = params.bagging_fraction < 1 and params.bagging_freq > 0
    bag_size = max(1, math.floor(params.bagging_fraction * n))
    sampling_features = params.feature_fraction < 1
    subset_size = max(1, math.floor(params.feature_fraction * n_features))

    trees: list[Tree] = []
    bag = all_rows
    executor = ThreadPoolExecutor(max_workers=n_workers) if n_workers > 1 else None
    hist_map = executor.map if executor is not None else map
    try:
        for m in range(params.num_iterations):
            rng = XorShift64(params.seed + m)
            if bagging and m % params.bagging_freq == 0:
                bag = np.array(rng.sample_indices(n, bag_size), dtype=np.intp)
            features = (rng.sample_indices(n_features, subset_size)
                        if sampling_features else all_features)
            grads = preds - y
            tree = grow_tree(
                binned, grads,
                rows=bag,
                allowed_features=features,
                n_bins_per_feature=n_bins,
                num_leaves=params.num_leaves,
                max_depth=params.max_depth,
                min_data_in_leaf=params.min_data_in_leaf,
                lambda_l2=params.lambda_l2,
                learning_rate=params.learning_rate,
                hist_map=hist_map,
            )
            trees.append(tree)
            preds += tree.predict_binned(binned)
            if loss_out is not None:
                loss_out.append(float(np.mean((preds - y) ** 2)))
    finally:
        if executor is not None:
            executor.shutdown()

    return GBDTModel(
        params=params,
        feature_names=feature_names,
        mapper=mapper,
        base_score=base_score,
        trees=tuple(trees),
        schema=schema,
    )


def predict(model: GBDTModel, X: np.ndarray) -> np.ndarray:
    """base_score plus the sum of tree outputs; never clamped."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(model.feature_names):
        raise ConfigurationError(
            f"model expects {len(model.feature_names)} feature columns, "
            f"got matrix of shape {X.shape}")
    binned = model.mapper.bin_matrix(X)
    preds = np.full(len(X), model.base_score)
    for tree in model.trees:
        preds += tree.predict_binned(binned)
    return preds


# ---------------------------------------------------------------------------
# Persistence

FORMAT_NAME = "lexcomp-gbdt"
FORMAT_VERSION = 1


def _node_to_dict(node: Node) -> dict:
    if isinstance(node, LeafNode):
        return {"value": float(node.value)}
    return {
        "feature": int(node.feature),
        "bin": int(node.bin_threshold),
        "default_left": bool(node.default_left),
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(d: dict) -> Node:
    if "value" in d:
        return LeafNode(value=float(d["value"]))
    return SplitNode(
        feature=int(d["feature"]),
        bin_threshold=int(d["bin"]),
        default_left=bool(d["default_left"]),
        left=_node_from_dict(d["left"]),
        right=_node_from_dict(d["right"]),
    )


def model_to_dict(model: GBDTModel) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "params": asdict(model.params),
        "feature_names": list(model.feature_names),
        "schema": model.schema,
        "base_score": float(model.base_score),
        "bins": model.mapper.to_list(),
        "trees": [_node_to_dict(t.root) for t in model.trees],
    }


def model_from_dict(d: dict) -> GBDTModel:
    if d.get("format") != FORMAT_NAME:
        raise FormatError(f"not a {FORMAT_NAME} model file")
    if d.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported model version {d.get('version')!r}")
    try:
        return GBDTModel(
            params=GBDTParams.from_dict(d["params"]),
            feature_names=tuple(d["feature_names"]),
            mapper=BinMapper.from_list(d["bins"]),
            base_score=float(d["base_score"]),
            trees=tuple(Tree(root=_node_from_dict(t)) for t in d["trees"]),
            schema=d.get("schema"),
        )
    except KeyError as exc:
        raise FormatError(f"model file missing key {exc}") from exc


def model_to_json(model: GBDTModel) -> str:
    """Canonical serialization: same model, same bytes."""
    return json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))


def save_model(model: GBDTModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> GBDTModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    return model_from_dict(doc)
