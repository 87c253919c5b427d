"""Random forest of CART trees on bootstrap samples.

Trees are stored as flat node arrays (feature -1 marks a leaf) inside
one shared arena so the whole forest predicts in a single kernel call.
Determinism is by construction: every tree derives its bootstrap rows
and per-node candidate-feature draws from a stream forked off the
master seed by tree index, so results are identical for any worker
count. Vote ties and split ties both resolve toward the lower option
(class 0; lowest feature index then lowest threshold).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .numeric import RngStream


@dataclass
class Tree:
    """One grown tree; arrays indexed by node id, root is node 0.

    counts holds the training class tallies at every node, not just
    leaves, which is what the importance traversal needs.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (nodes, 2)
    leaf_class: np.ndarray


@dataclass
class Forest:
    feature: np.ndarray  # concatenated node arenas
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray
    leaf_class: np.ndarray
    roots: np.ndarray  # arena offset of each tree's root
    sizes: np.ndarray  # node count per tree
    oob: list  # per-tree out-of-bag row indices into the training matrix
    n_features: int
    m: int
    n_min: int

    @property
    def n_trees(self) -> int:
        return int(self.roots.shape[0])


@dataclass
class Split:
    feature: int
    threshold: float
    weighted_impurity: float


def gini_impurity(counts) -> float:
    """1 - sum of squared class shares for a two-class count pair."""
    c0, c1 = int(counts[0]), int(counts[1])
    if c0 < 0 or c1 < 0:
        raise ValueError("negative class count")
    n = c0 + c1
    if n == 0:
        raise ValueError("empty node has no impurity")
    return 1.0 - (c0 / n) ** 2 - (c1 / n) ** 2


def bootstrap_sample(n: int, rng: RngStream):
    """n with-replacement row draws plus the sorted out-of-bag set."""
    if n < 1:
        raise ValueError("need n >= 1")
    rows = rng.integers(0, n, size=n).astype(np.int64)
    oob = np.setdiff1d(np.arange(n, dtype=np.int64), rows)
    return rows, oob


def _stream(seed) -> RngStream:
    return seed if isinstance(seed, RngStream) else RngStream(int(seed))


def _feature_subsets(p: int, m: int, max_nodes: int, rng: RngStream) -> np.ndarray:
    # per-node random m-subsets, stored ascending so the scan's positional
    # tie-break equals the lowest-feature-index rule
    keys = rng.random((max_nodes, p))
    return np.sort(np.argsort(keys, axis=1)[:, :m].astype(np.int64), axis=1)


def best_split(X, y, rows, features, n_min: int = 1) -> Split | None:
    """Best Gini split of the given rows over the candidate features;
    None when nothing strictly reduces impurity (or the node is too
    small). Mirrors the in-kernel rule used during growth."""
    rows = np.asarray(rows, dtype=np.int64)
    features = np.asarray(features, dtype=np.int64)
    seg = rows.shape[0]
    if seg < 2 or seg < n_min:
        return None
    yb = np.asarray(y, dtype=np.int64)[rows]
    c1 = int(yb.sum())
    c0 = seg - c1
    if c0 == 0 or c1 == 0:
        return None
    sub = np.ascontiguousarray(np.asarray(X, dtype=np.float64)[rows][:, features])
    pos, thr, wimp = kernels.best_split_scan(sub, yb)
    if pos < 0:
        return None
    parent = 1.0 - (c0 / seg) ** 2 - (c1 / seg) ** 2
    if not (wimp < parent - 1e-12):
        return None
    return Split(int(features[pos]), float(thr), float(wimp))


def grow_tree(X, y, rows, m: int, n_min: int, rng: RngStream) -> Tree:
    """Grow one tree on the given rows (duplicates allowed, e.g. a
    bootstrap sample); candidate features are re-drawn per node."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    rows = np.asarray(rows, dtype=np.int64)
    if rows.shape[0] == 0:
        raise ValueError("cannot grow a tree on zero rows")
    p = X.shape[1]
    if not 1 <= m <= p:
        raise ValueError(f"m must be in [1, {p}]")
    Xb = np.ascontiguousarray(X[rows])
    yb = np.ascontiguousarray(y[rows])
    max_nodes = 2 * rows.shape[0] + 1
    subsets = _feature_subsets(p, m, max_nodes, rng.fork("features"))
    feature, threshold, left, right, counts, n_nodes = kernels.grow_tree_arrays(
        Xb, yb, subsets, n_min
    )
    feature = feature[:n_nodes]
    counts = counts[:n_nodes]
    return Tree(
        feature=feature,
        threshold=threshold[:n_nodes],
        left=left[:n_nodes],
        right=right[:n_nodes],
        counts=counts,
        leaf_class=(counts[:, 1] > counts[:, 0]).astype(np.int64),
    )


def predict_tree(tree: Tree, X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    return kernels.tree_predict(
        tree.feature, tree.threshold, tree.left, tree.right, tree.leaf_class, 0, X
    )


def train_forest(X, y, trees: int = 500, m: int | None = None, n_min: int = 1,
                 seed=0, workers: int = 1) -> Forest:
    """Grow `trees` bootstrap trees; m defaults to floor(sqrt(p))."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be n x p with one label per row")
    classes = np.unique(y)
    if not np.all(np.isin(classes, (0, 1))) or classes.size < 2:
        raise ValueError("labels must contain both classes 0 and 1")
    if trees < 1:
        raise ValueError("need at least one tree")
    n, p = X.shape
    if m is None:
        m = max(1, math.isqrt(p))
    base = _stream(seed).fork("forest")

    def one(t: int):
        t_rng = base.fork(f"tree/{t}")
        rows, oob = bootstrap_sample(n, t_rng.fork("bootstrap"))
        return grow_tree(X, y, rows, m, n_min, t_rng), oob

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            grown = list(pool.map(one, range(trees)))
    else:
        grown = [one(t) for t in range(trees)]

    sizes = np.array([tr.feature.shape[0] for tr, _ in grown], dtype=np.int64)
    roots = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    feature = np.concatenate([tr.feature for tr, _ in grown])
    threshold = np.concatenate([tr.threshold for tr, _ in grown])
    left = np.concatenate([tr.left for tr, _ in grown])
    right = np.concatenate([tr.right for tr, _ in grown])
    counts = np.concatenate([tr.counts for tr, _ in grown])
    leaf_class = np.concatenate([tr.leaf_class for tr, _ in grown])
    for t in range(trees):
        lo = roots[t]
        span = slice(lo, lo + sizes[t])
        left[span] = np.where(left[span] >= 0, left[span] + lo, -1)
        right[span] = np.where(right[span] >= 0, right[span] + lo, -1)
    return Forest(
        feature=feature, threshold=threshold, left=left, right=right,
        counts=counts, leaf_class=leaf_class, roots=roots, sizes=sizes,
        oob=[oob for _, oob in grown], n_features=p, m=m, n_min=n_min,
    )


def vote_fractions(forest: Forest, X) -> np.ndarray:
    """Share of trees voting class 1, per row of X."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.shape[1] != forest.n_features:
        raise ValueError(f"expected {forest.n_features} features, got {X.shape[1]}")
    ones = kernels.forest_vote_counts(
        forest.feature, forest.threshold, forest.left, forest.right,
        forest.leaf_class, forest.roots, X,
    )
    return ones / forest.n_trees


def predict01(forest: Forest, X) -> np.ndarray:
    """Majority vote; an exact tie goes to class 0."""
    return (vote_fractions(forest, X) > 0.5).astype(np.int64)


def predict_vote(forest: Forest, x):
    """Single-point prediction: (class, fraction of trees voting 1)."""
    frac = float(vote_fractions(forest, np.asarray(x, dtype=np.float64)[None, :])[0])
    return int(frac > 0.5), frac


def class0_scores(forest: Forest, X) -> np.ndarray:
    """Score where larger means more donor-like: class-0 vote share."""
    return 1.0 - vote_fractions(forest, X)


def importance_gini(forest: Forest):
    """Mean decrease in node-size-weighted Gini per feature, averaged
    over trees; returns (feature index, value) sorted descending, ties
    to the lower index."""
    internal = forest.feature >= 0
    n_node = forest.counts.sum(axis=1).astype(np.float64)
    imp = 1.0 - (forest.counts[:, 0] / n_node) ** 2 - (forest.counts[:, 1] / n_node) ** 2
    root_of = np.repeat(forest.roots, forest.sizes)
    li = forest.left[internal]
    ri = forest.right[internal]
    child_w = (n_node[li] * imp[li] + n_node[ri] * imp[ri]) / n_node[internal]
    delta = (n_node[internal] / n_node[root_of[internal]]) * (imp[internal] - child_w)
    acc = np.zeros(forest.n_features)
    np.add.at(acc, forest.feature[internal], delta)
    acc /= forest.n_trees
    order = sorted(range(forest.n_features), key=lambda j: (-acc[j], j))
    return [(j, float(acc[j])) for j in order]


def importance_permutation(forest: Forest, X, y, rng: RngStream):
    """Mean out-of-bag accuracy drop per feature when that feature's
    column is shuffled; (feature index, value) sorted descending."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    used = 0
    drop = np.zeros(forest.n_features)
    for t in range(forest.n_trees):
        oob = forest.oob[t]
        if oob.size == 0:
            continue
        used += 1
        Xo = np.ascontiguousarray(X[oob])
        yo = y[oob]
        args = (forest.feature, forest.threshold, forest.left, forest.right,
                forest.leaf_class, int(forest.roots[t]))
        base_acc = float((kernels.tree_predict(*args, Xo) == yo).mean())
        for f in range(forest.n_features):
            perm = rng.fork(f"perm/{t}/{f}").permutation(oob.size)
            Xp = Xo.copy()
            Xp[:, f] = Xo[perm, f]
            acc = float((kernels.tree_predict(*args, Xp) == yo).mean())
            drop[f] += base_acc - acc
    if used == 0:
        raise ValueError("every tree had an empty out-of-bag set")
    drop /= used
    order = sorted(range(forest.n_features), key=lambda j: (-drop[j], j))
    return [(j, float(drop[j])) for j in order]
