"""Pure-numpy kernel backend.

The sequential kernels (SMO, MLP epochs, Jacobi) reuse the shared bodies
from ``_impl`` unchanged; the tree kernels get vectorized rewrites that
keep every floating-point expression identical to the numba loops so both
backends pick the same splits.
"""

import numpy as np

from ._impl import jacobi_eigh, mlp_train, smo_solve  # noqa: F401

NAME = "numpy"


def best_split_scan(values, y):
    """Best Gini split over candidate feature columns.

    values: (n, m) float64, one column per candidate feature for the rows
    of a single node. y: (n,) int64 class labels in {0, 1}.
    Returns (feature_pos, threshold, weighted_child_impurity); feature_pos
    is -1 when no boundary between distinct values exists.

    Ties resolve to the lowest candidate position, then lowest threshold
    (strict < while scanning features in order, first-minimum argmin
    within a feature).
    """
    n, m = values.shape
    best_f = -1
    best_thr = 0.0
    best_imp = np.inf
    if n < 2:
        return best_f, best_thr, best_imp
    total1 = int(y.sum())
    nl = np.arange(1, n)
    nr = n - nl
    for f in range(m):
        col = values[:, f]
        order = np.argsort(col, kind="mergesort")
        sv = col[order]
        c1l = np.cumsum(y[order])[:-1]
        c0l = nl - c1l
        c1r = total1 - c1l
        c0r = nr - c1r
        gl = 1.0 - (c0l / nl) ** 2 - (c1l / nl) ** 2
        gr = 1.0 - (c0r / nr) ** 2 - (c1r / nr) ** 2
        imp = (nl * gl + nr * gr) / n
        imp = np.where(sv[1:] > sv[:-1], imp, np.inf)
        s = int(np.argmin(imp))
        if imp[s] < best_imp:
            best_imp = imp[s]
            best_f = f
            best_thr = (sv[s] + sv[s + 1]) / 2.0
    return best_f, best_thr, float(best_imp)


def grow_tree_arrays(Xb, yb, feat_subsets, n_min):
    """Grow one CART tree over the pre-gathered rows Xb/yb.

    feat_subsets[k] holds the candidate feature indices (ascending) for
    the k-th node created; its row count bounds the node budget. Nodes
    split while impure, at least n_min rows, and the best candidate split
    lowers weighted Gini by more than 1e-12. Returns (feature, threshold,
    left, right, counts, n_nodes); feature -1 marks a leaf.
    """
    n_b = Xb.shape[0]
    max_nodes = feat_subsets.shape[0]
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    counts = np.zeros((max_nodes, 2), dtype=np.int64)
    idx = np.arange(n_b, dtype=np.int64)
    stack = [(0, 0, n_b)]
    n_nodes = 1
    while stack:
        node, lo, hi = stack.pop()
        seg = hi - lo
        seg_idx = idx[lo:hi]
        c1 = int(yb[seg_idx].sum())
        c0 = seg - c1
        counts[node, 0] = c0
        counts[node, 1] = c1
        if c0 == 0 or c1 == 0 or seg < n_min:
            continue
        feats = feat_subsets[node]
        pos, thr, wimp = best_split_scan(
            np.ascontiguousarray(Xb[seg_idx][:, feats]), yb[seg_idx]
        )
        if pos < 0:
            continue
        parent_imp = 1.0 - (c0 / seg) ** 2 - (c1 / seg) ** 2
        if not (wimp < parent_imp - 1e-12):
            continue
        f = feats[pos]
        go_left = Xb[seg_idx, f] <= thr
        nl = int(go_left.sum())
        idx[lo:hi] = np.concatenate([seg_idx[go_left], seg_idx[~go_left]])
        lchild, rchild = n_nodes, n_nodes + 1
        n_nodes += 2
        feature[node] = f
        threshold[node] = thr
        left[node] = lchild
        right[node] = rchild
        stack.append((rchild, lo + nl, hi))
        stack.append((lchild, lo, lo + nl))
    return feature, threshold, left, right, counts, n_nodes


def tree_predict(feat, thr, left, right, leaf_class, root, X):
    """Route every row of X to its leaf; returns the per-row leaf class."""
    n = X.shape[0]
    node = np.full(n, root, dtype=np.int64)
    active = feat[node] >= 0
    while active.any():
        idx = np.nonzero(active)[0]
        nd = node[idx]
        go_left = X[idx, feat[nd]] <= thr[nd]
        node[idx] = np.where(go_left, left[nd], right[nd])
        active = feat[node] >= 0
    return leaf_class[node].astype(np.int64)


def forest_vote_counts(feat, thr, left, right, leaf_class, roots, X):
    """Number of trees voting class 1 for each row of X."""
    counts = np.zeros(X.shape[0], dtype=np.int64)
    for t in range(roots.shape[0]):
        counts += tree_predict(feat, thr, left, right, leaf_class, roots[t], X)
    return counts
