"""One regression tree grown leaf-wise over binned features.

Split search works on per-leaf histograms: for every allowed feature the
gradients and row counts are accumulated per bin (missing bin separate),
and every cut point is scored with the L2-regularized gain

    G_L^2 / (H_L + lam) + G_R^2 / (H_R + lam) - G_P^2 / (H_P + lam)

where G sums gradients and H counts rows (unit curvature, squared-error
loss). Rows in the missing bin are tried on both sides; the side with the
higher gain becomes the node's default direction, left when the node saw
no missing values. Ties anywhere break toward the lowest feature index,
then the lowest cut, then default-left. The highest-gain live leaf is
split until the leaf budget, the depth cap, or gain runs out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .binning import MISSING_BIN

Node = Union["SplitNode", "LeafNode"]


@dataclass(frozen=True)
class LeafNode:
    value: float


@dataclass(frozen=True)
class SplitNode:
    feature: int
    bin_threshold: int      # bins <= threshold go left
    default_left: bool      # where missing-bin rows go
    left: Node
    right: Node


@dataclass(frozen=True)
class Tree:
    root: Node

    def predict_binned(self, binned: np.ndarray) -> np.ndarray:
        """Leaf value per row of a binned (n, F) int32 matrix."""
        out = np.empty(len(binned))
        _route(self.root, binned, np.arange(len(binned)), out)
        return out

    def n_leaves(self) -> int:
        return sum(1 for n in _walk(self.root) if isinstance(n, LeafNode))

    def depth(self) -> int:
        def go(node: Node) -> int:
            if isinstance(node, LeafNode):
                return 0
            return 1 + max(go(node.left), go(node.right))
        return go(self.root)


def _walk(node: Node) -> Iterable[Node]:
    yield node
    if isinstance(node, SplitNode):
        yield from _walk(node.left)
        yield from _walk(node.right)


def _route(node: Node, binned: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
    if isinstance(node, LeafNode):
        out[rows] = node.value
        return
    col = binned[rows, node.feature]
    goes_left = col <= node.bin_threshold
    if node.default_left:
        goes_left |= col == MISSING_BIN
    else:
        goes_left &= col != MISSING_BIN
    _route(node.left, binned, rows[goes_left], out)
    _route(node.right, binned, rows[~goes_left], out)


@dataclass(frozen=True)
class SplitCandidate:
    gain: float
    feature: int
    bin_threshold: int
    default_left: bool


def _column_histogram(col: np.ndarray, grads: np.ndarray,
                      n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    """(gradient sums, row counts) per bin; slot 0 is the missing bin."""
    shifted = col.astype(np.intp) - MISSING_BIN  # missing -> 0, bin b -> b+1
    grad_hist = np.bincount(shifted, weights=grads, minlength=n_bins + 1)
    count_hist = np.bincount(shifted, minlength=n_bins + 1)
    return grad_hist, count_hist


def find_best_split(
    histograms: Sequence[tuple[int, np.ndarray, np.ndarray]],
    g_total: float,
    h_total: int,
    lambda_l2: float,
    min_child: int,
) -> Optional[SplitCandidate]:
    """Best candidate over per-feature (index, grad_hist, count_hist) triples.

    histograms must be ordered by ascending feature index so the documented
    tie-breaking falls out of strict-improvement replacement. Returns None
    when no candidate has strictly positive gain with both children holding
    at least min_child rows.
    """
    parent_score = g_total * g_total / (h_total + lambda_l2)
    best: Optional[SplitCandidate] = None
    for feature, grad_hist, count_hist in histograms:
        n_bins = len(grad_hist) - 1
        if n_bins < 2:
            continue
        g_miss = grad_hist[0]
        h_miss = int(count_hist[0])
        g_left = np.cumsum(grad_hist[1:])
        h_left = np.cumsum(count_hist[1:])
        for cut in range(n_bins - 1):
            for default_left in (True, False):
                gl = g_left[cut]
                hl = int(h_left[cut])
                if default_left:
                    gl += g_miss
                    hl += h_miss
                hr = h_total - hl
                if hl < min_child or hr < min_child:
                    continue
                gr = g_total - gl
                gain = (gl * gl / (hl + lambda_l2)
                        + gr * gr / (hr + lambda_l2)
                        - parent_score)
                if gain > 0 and (best is None or gain > best.gain):
                    best = SplitCandidate(
                        gain=float(gain), feature=feature,
                        bin_threshold=cut, default_left=default_left)
    return best


@dataclass
class _LeafState:
    """A live leaf during growth; order of creation breaks gain ties."""

    rows: np.ndarray
    depth: int
    g_sum: float
    split: Optional[SplitCandidate] = None


def grow_tree(
    binned: np.ndarray,
    grads: np.ndarray,
    rows: np.ndarray,
    allowed_features: Sequence[int],
    n_bins_per_feature: Sequence[int],
    num_leaves: int,
    max_depth: int,
    min_data_in_leaf: int,
    lambda_l2: float,
    learning_rate: float,
    hist_map: Callable = map,
) -> Tree:
    """Grow one tree on the bagged rows and return it with shrunk leaf values.

    hist_map orders histogram construction across features; any map with
    deterministic output order (builtin map, executor.map) gives identical
    trees, since everything downstream consumes results in feature order.
    """
    min_child = max(1, min_data_in_leaf)

    def make_leaf(leaf_rows: np.ndarray, depth: int) -> _LeafState:
        state = _LeafState(
            rows=leaf_rows, depth=depth,
            g_sum=float(np.sum(grads[leaf_rows])),
        )
        if depth < max_depth and len(leaf_rows) >= 2 * min_child:
            leaf_grads = grads[leaf_rows]
            cols = [binned[leaf_rows, j] for j in allowed_features]
            hists = list(hist_map(
                lambda args: _column_histogram(args[0], leaf_grads, args[1]),
                zip(cols, (n_bins_per_feature[j] for j in allowed_features)),
            ))
            state.split = find_best_split(
                [(j, gh, ch) for j, (gh, ch) in zip(allowed_features, hists)],
                g_total=state.g_sum,
                h_total=len(leaf_rows),
                lambda_l2=lambda_l2,
                min_child=min_child,
            )
        return state

    leaves: list[_LeafState] = [make_leaf(rows, depth=0)]
    splits: dict[int, tuple[SplitCandidate, int, int]] = {}  # leaf slot -> (split, left slot, right slot)

    while len(leaves) - len(splits) < num_leaves:
        candidates = [(i, s) for i, s in enumerate(leaves)
                      if i not in splits and s.split is not None]
        if not candidates:
            break
        slot, state = max(candidates, key=lambda pair: pair[1].split.gain)
        # max() keeps the earliest-seen maximum, so equal gains favor the
        # earliest-created leaf.
        split = state.split
        col = binned[state.rows, split.feature]
        goes_left = col <= split.bin_threshold
        if split.default_left:
            goes_left |= col == MISSING_BIN
        else:
            goes_left &= col != MISSING_BIN
        left_rows = state.rows[goes_left]
        right_rows = state.rows[~goes_left]
        if min(len(left_rows), len(right_rows)) < min_child:
            raise AssertionError("split produced an undersized child")
        leaves.append(make_leaf(left_rows, state.depth + 1))
        leaves.append(make_leaf(right_rows, state.depth + 1))
        splits[slot] = (split, len(leaves) - 2, len(leaves) - 1)
        state.rows = np.empty(0, dtype=state.rows.dtype)  # rows now live in children

    def build(slot: int) -> Node:
        if slot in splits:
            split, left_slot, right_slot = splits[slot]
            return SplitNode(
                feature=split.feature,
                bin_threshold=split.bin_threshold,
                default_left=split.default_left,
                left=build(left_slot),
                right=build(right_slot),
            )
        state = leaves[slot]
        h = len(state.rows)
        return LeafNode(value=-state.g_sum / (h + lambda_l2) * learning_rate)

    return Tree(root=build(0))
