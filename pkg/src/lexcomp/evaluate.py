"""Pearson correlation, k-fold assignment, and cross-validated training.

Fold assignment is a seeded shuffle followed by round-robin dealing, so
fold sizes differ by at most one and the assignment is a pure function of
(n, k, seed). The headline CV number is the unweighted mean of per-fold
correlations; pooling predictions across folds before correlating is
available separately and labeled as such wherever it is printed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import gbdt
from .errors import ConfigurationError, DataError, LexcompError, UndefinedCorrelation
from .features import FeatureMatrix, schema_to_dict
from .rng import XorShift64


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation. Constant input is an error, never 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
        raise DataError(f"correlation needs two equal-length vectors, "
                        f"got shapes {x.shape} and {y.shape}")
    if len(x) < 2:
        raise DataError("correlation needs at least 2 points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("correlation inputs must be finite")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.sum(dx * dx))
    syy = float(np.sum(dy * dy))
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("correlation is undefined for a constant vector")
    # sxx*syy can underflow to 0 (or overflow) even though both factors are
    # normal; fall back to the slightly less exact factored form then.
    prod = sxx * syy
    denom = math.sqrt(prod) if 0 < prod < math.inf else math.sqrt(sxx) * math.sqrt(syy)
    r = float(np.sum(dx * dy)) / denom
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class FoldAssignment:
    """Instance index -> fold index in 0..k-1.

    The default construction partitions with sizes differing by at most 1;
    the grouped variant (same target kept in one fold) can deviate from
    that and says so in its docstring.
    """

    folds: np.ndarray
    k: int
    seed: int

    def __len__(self) -> int:
        return len(self.folds)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds != fold)


def _check_k(n: int, k: int) -> None:
    if k < 2:
        raise ConfigurationError(f"k must be at least 2, got {k}")
    if n < k:
        raise DataError(f"cannot split {n} instances into {k} folds")


def kfold_split(n: int, k: int = 9, seed: int = 0) -> FoldAssignment:
    """Seeded shuffle + round-robin: deterministic, sizes differ by <= 1."""
    _check_k(n, k)
    order = list(range(n))
    XorShift64(seed).shuffle(order)
    folds = np.empty(n, dtype=np.intp)
    for position, index in enumerate(order):
        folds[index] = position % k
    return FoldAssignment(folds=folds, k=k, seed=seed)


def kfold_split_stratified(labels: Sequence[str], k: int = 9,
                           seed: int = 0) -> FoldAssignment:
    """Round-robin within label-contiguous shuffled order.

    Each label's indices are shuffled separately (one shared generator,
    labels visited in sorted order) and concatenated before dealing, so
    every fold gets a near-proportional share of each label while overall
    sizes still differ by at most 1.
    """
    n = len(labels)
    _check_k(n, k)
    rng = XorShift64(seed)
    order: list[int] = []
    for label in sorted(set(labels)):
        group = [i for i, lab in enumerate(labels) if lab == label]
        rng.shuffle(group)
        order.extend(group)
    folds = np.empty(n, dtype=np.intp)
    for position, index in enumerate(order):
        folds[index] = position % k
    return FoldAssignment(folds=folds, k=k, seed=seed)


def kfold_split_grouped(keys: Sequence[str], k: int = 9,
                        seed: int = 0) -> FoldAssignment:
    """Whole-group assignment: every instance with the same key lands in one
    fold, so repeated targets never straddle a train/test boundary. Fold
    sizes are balanced in groups, not instances, and may differ by more
    than 1 instance.
    """
    distinct: list[str] = []
    seen = set()
    for key in keys:
        if key not in seen:
            seen.add(key)
            distinct.append(key)
    _check_k(len(distinct), k)
    order = list(range(len(distinct)))
    XorShift64(seed).shuffle(order)
    key_fold = {distinct[index]: position % k
                for position, index in enumerate(order)}
    folds = np.array([key_fold[key] for key in keys], dtype=np.intp)
    return FoldAssignment(folds=folds, k=k, seed=seed)


@dataclass(frozen=True)
class CVResult:
    per_fold: tuple[float, ...]
    mean_r: float
    k: int
    seed: int
    pooled_r: Optional[float] = None


def train_matrix(matrix: FeatureMatrix, params: gbdt.GBDTParams,
                 n_workers: int = 1,
                 loss_out: Optional[list] = None) -> gbdt.GBDTModel:
    """Fit a model on an assembled matrix, carrying its schema along."""
    if matrix.gold is None:
        raise DataError("training needs gold scores on every instance")
    return gbdt.fit(
        matrix.rows, matrix.gold, params,
        feature_names=matrix.schema.names,
        n_workers=n_workers,
        loss_out=loss_out,
        schema=schema_to_dict(matrix.schema),
    )


def run_cv(
    matrix: FeatureMatrix,
    params: gbdt.GBDTParams,
    k: int = 9,
    seed: int = 0,
    folds: Optional[FoldAssignment] = None,
    pooled: bool = False,
    n_workers: int = 1,
) -> CVResult:
    """Per-fold train/predict/correlate plus the unweighted mean.

    A precomputed FoldAssignment pins the folds (ablation uses this to
    compare configurations on identical splits); otherwise folds come from
    kfold_split(n, k, seed). Any error inside a fold is re-raised with the
    fold index attached.
    """
    if matrix.gold is None:
        raise DataError("cross-validation needs gold scores on every instance")
    if folds is None:
        folds = kfold_split(len(matrix.rows), k, seed)
    elif len(folds) != len(matrix.rows):
        raise ConfigurationError(
            f"fold assignment covers {len(folds)} instances, matrix has {len(matrix.rows)}")

    per_fold: list[float] = []
    pooled_preds = np.empty(len(matrix.rows)) if pooled else None
    for fold in range(folds.k):
        try:
            train_idx = folds.train_indices(fold)
            test_idx = folds.test_indices(fold)
            model = gbdt.fit(
                matrix.rows[train_idx], matrix.gold[train_idx], params,
                feature_names=matrix.schema.names, n_workers=n_workers)
            preds = gbdt.predict(model, matrix.rows[test_idx])
            per_fold.append(pearson(preds, matrix.gold[test_idx]))
        except LexcompError as exc:
            raise type(exc)(f"fold {fold}: {exc}") from exc
        if pooled_preds is not None:
            pooled_preds[test_idx] = preds

    pooled_r = pearson(pooled_preds, matrix.gold) if pooled else None
    return CVResult(
        per_fold=tuple(per_fold),
        mean_r=float(np.mean(per_fold)),
        k=folds.k,
        seed=folds.seed,
        pooled_r=pooled_r,
    )


def cv_to_tsv(result: CVResult) -> str:
    """fold/r rows, a mean row, and a pooled row when pooling was requested."""
    lines = ["fold\tr"]
    for fold, r in enumerate(result.per_fold):
        lines.append(f"{fold}\t{r!r}")
    lines.append(f"mean\t{result.mean_r!r}")
    if result.pooled_r is not None:
        lines.append(f"pooled\t{result.pooled_r!r}")
    return "\n".join(lines) + "\n"
