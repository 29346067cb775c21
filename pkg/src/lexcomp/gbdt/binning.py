"""Rank-based feature binning.

Each column is discretized independently into at most max_bin bins chosen
at value-rank quantiles, so bins hold roughly equal numbers of rows no
matter how the values are scaled. Boundaries are actual data values (the
smallest value of the bin to the right), which makes bin assignment
commute with any strictly increasing transform of the column. The bin of
x is the index of the first boundary greater than x; NaN maps to a
reserved missing bin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MISSING_BIN = -1


@dataclass(frozen=True)
class ColumnBins:
    """Bin layout for one column.

    boundaries: ascending cut values; value bins are 0..len(boundaries).
    all_missing: the column had no finite values at fit time, so every
    value (finite or not) maps to the missing bin.
    """

    boundaries: np.ndarray = field(default_factory=lambda: np.empty(0))
    all_missing: bool = False

    @property
    def n_bins(self) -> int:
        """Number of value bins (the missing bin not included)."""
        return 0 if self.all_missing else len(self.boundaries) + 1

    def bin_values(self, values: np.ndarray) -> np.ndarray:
        """Map one column of raw values to int32 bin indices."""
        out = np.full(len(values), MISSING_BIN, dtype=np.int32)
        if self.all_missing:
            return out
        finite = np.isfinite(values)
        out[finite] = np.searchsorted(
            self.boundaries, values[finite], side="right").astype(np.int32)
        return out


def build_column_bins(values: np.ndarray, max_bin: int,
                      min_data_in_bin: int) -> ColumnBins:
    """Fit the bin layout for one column.

    Distinct values up to max_bin each get their own bin. Beyond that, a
    single pass over the sorted distinct values closes a group whenever the
    cumulative row count reaches the next even-split quantile, so identical
    values never straddle a boundary. A second pass merges any group with
    fewer than min_data_in_bin rows into its smaller neighbor.
    """
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    if len(finite) == 0:
        return ColumnBins(all_missing=True)
    distinct, counts = np.unique(finite, return_counts=True)

    if len(distinct) <= max_bin:
        groups = [[v] for v in distinct]
        group_counts = [int(c) for c in counts]
    else:
        groups, group_counts = [], []
        current: list[float] = []
        current_count = 0
        cumulative = 0
        n = len(finite)
        for v, c in zip(distinct, counts):
            current.append(float(v))
            current_count += int(c)
            cumulative += int(c)
            if cumulative >= (len(groups) + 1) * n / max_bin:
                groups.append(current)
                group_counts.append(current_count)
                current, current_count = [], 0
        if current:
            groups.append(current)
            group_counts.append(current_count)

    # Merge undersized groups into the smaller adjacent neighbor (ties and
    # edges prefer the left neighbor) until every group is big enough.
    while len(groups) > 1:
        small = next((i for i, c in enumerate(group_counts)
                      if c < min_data_in_bin), None)
        if small is None:
            break
        if small == 0:
            into = 1
        elif small == len(groups) - 1:
            into = small - 1
        elif group_counts[small - 1] <= group_counts[small + 1]:
            into = small - 1
        else:
            into = small + 1
        lo, hi = min(small, into), max(small, into)
        groups[lo:hi + 1] = [groups[lo] + groups[hi]]
        group_counts[lo:hi + 1] = [group_counts[lo] + group_counts[hi]]

    boundaries = np.array([g[0] for g in groups[1:]], dtype=float)
    return ColumnBins(boundaries=boundaries)


@dataclass(frozen=True)
class BinMapper:
    columns: tuple[ColumnBins, ...]

    @classmethod
    def fit(cls, X: np.ndarray, max_bin: int, min_data_in_bin: int) -> "BinMapper":
        return cls(columns=tuple(
            build_column_bins(X[:, j], max_bin, min_data_in_bin)
            for j in range(X.shape[1])
        ))

    @property
    def n_features(self) -> int:
        return len(self.columns)

    def bin_matrix(self, X: np.ndarray) -> np.ndarray:
        """Raw (n, F) float matrix to int32 bin indices; NaN -> MISSING_BIN."""
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected a 2-d matrix with {self.n_features} columns, got {X.shape}")
        out = np.empty(X.shape, dtype=np.int32)
        for j, col in enumerate(self.columns):
            out[:, j] = col.bin_values(X[:, j])
        return out

    def to_list(self) -> list[dict]:
        return [
            {"boundaries": [float(b) for b in col.boundaries],
             "all_missing": col.all_missing}
            for col in self.columns
        ]

    @classmethod
    def from_list(cls, entries: list[dict]) -> "BinMapper":
        return cls(columns=tuple(
            ColumnBins(
                boundaries=np.array(e["boundaries"], dtype=float),
                all_missing=bool(e["all_missing"]),
            )
            for e in entries
        ))
