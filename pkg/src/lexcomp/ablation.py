"""Feature-group ablation: how much does removing one group cost?

Every configuration is scored with cross-validation on the same fold
assignment and seed as the full system, so reported differences isolate
the group's contribution. An optional held-out labeled test set adds a
second column: train on all CV rows, predict the test set, correlate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import gbdt
from .errors import DataError
from .evaluate import CVResult, kfold_split, pearson, run_cv, train_matrix
from .features import FeatureMatrix


@dataclass(frozen=True)
class AblationRow:
    group: str              # "full" for the reference configuration
    cv_r: float
    cv_diff: Optional[float]       # ablated - full; None on the full row
    test_r: Optional[float] = None
    test_diff: Optional[float] = None


@dataclass(frozen=True)
class AblationReport:
    rows: tuple[AblationRow, ...]
    k: int
    seed: int

    @property
    def full(self) -> AblationRow:
        return self.rows[0]


def _test_r(matrix: FeatureMatrix, test_matrix: FeatureMatrix,
            params: gbdt.GBDTParams, n_workers: int) -> float:
    if test_matrix.gold is None:
        raise DataError("held-out test set needs gold scores")
    model = train_matrix(matrix, params, n_workers=n_workers)
    preds = gbdt.predict(model, test_matrix.rows)
    return pearson(preds, test_matrix.gold)


def ablate(
    matrix: FeatureMatrix,
    groups: Sequence[str],
    params: gbdt.GBDTParams,
    k: int = 9,
    seed: int = 0,
    test_matrix: Optional[FeatureMatrix] = None,
    pooled: bool = False,
    n_workers: int = 1,
) -> AblationReport:
    """Full-system row first, then one row per removed group.

    Unknown group names and groups absent from the schema surface as
    configuration errors before any training starts.
    """
    ablated = {g: matrix.drop_group(g) for g in groups}  # validates the names
    if test_matrix is not None:
        if test_matrix.schema.names != matrix.schema.names:
            raise DataError("test set was featurized with a different schema")
        ablated_test = {g: test_matrix.drop_group(g) for g in groups}

    folds = kfold_split(len(matrix.rows), k, seed)

    def score(m: FeatureMatrix) -> CVResult:
        return run_cv(m, params, k=k, seed=seed, folds=folds,
                      pooled=pooled, n_workers=n_workers)

    full_cv = score(matrix)
    full_cv_r = full_cv.pooled_r if pooled else full_cv.mean_r
    full_test_r = (None if test_matrix is None
                   else _test_r(matrix, test_matrix, params, n_workers))
    rows = [AblationRow(group="full", cv_r=full_cv_r, cv_diff=None,
                        test_r=full_test_r, test_diff=None)]

    for group in groups:
        cv = score(ablated[group])
        cv_r = cv.pooled_r if pooled else cv.mean_r
        test_r = test_diff = None
        if test_matrix is not None:
            test_r = _test_r(ablated[group], ablated_test[group], params, n_workers)
            test_diff = test_r - full_test_r
        rows.append(AblationRow(
            group=group,
            cv_r=cv_r,
            cv_diff=cv_r - full_cv_r,
            test_r=test_r,
            test_diff=test_diff,
        ))
    return AblationReport(rows=tuple(rows), k=k, seed=seed)


def ablation_to_tsv(report: AblationReport) -> str:
    has_test = report.full.test_r is not None
    header = "configuration\tcv_r\tcv_diff"
    if has_test:
        header += "\ttest_r\ttest_diff"
    lines = [header]
    for row in report.rows:
        label = row.group if row.group == "full" else f"-{row.group}"
        cells = [label, repr(row.cv_r), "" if row.cv_diff is None else repr(row.cv_diff)]
        if has_test:
            cells.append(repr(row.test_r))
            cells.append("" if row.test_diff is None else repr(row.test_diff))
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def render_ablation_figure(report: AblationReport, path: str) -> None:
    """Bar chart of per-group correlation differences, written to a file."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    diff_rows = [r for r in report.rows if r.group != "full"]
    fig, ax = plt.subplots(figsize=(7, max(2.0, 0.6 * len(diff_rows) + 1.5)))
    if diff_rows:
        labels = [r.group for r in diff_rows]
        positions = range(len(diff_rows))
        cv_diffs = [r.cv_diff for r in diff_rows]
        if report.full.test_r is not None:
            height = 0.38
            ax.barh([p + height / 2 for p in positions], cv_diffs,
                    height=height, label="CV")
            ax.barh([p - height / 2 for p in positions],
                    [r.test_diff for r in diff_rows], height=height, label="test")
            ax.legend()
        else:
            ax.barh(list(positions), cv_diffs, height=0.6)
        ax.set_yticks(list(positions), labels)
        ax.axvline(0.0, linewidth=0.8, color="black")
    ax.set_xlabel("Pearson r difference vs full system")
    ax.set_title(f"Feature-group ablation (full CV r = {report.full.cv_r:.4f})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
