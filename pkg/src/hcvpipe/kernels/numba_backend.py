"""Numba kernel backend: @njit-compiled loops, cached to disk.

Importing this module requires numba; the dispatcher falls back to the
numpy backend when it is absent or disabled via HCVPIPE_BACKEND=numpy.
"""

import numpy as np
from numba import njit

from . import _impl

NAME = "numba"

_JIT = dict(cache=True, nogil=True)

smo_solve = njit(**_JIT)(_impl.smo_solve)
mlp_train = njit(**_JIT)(_impl.mlp_train)
jacobi_eigh = njit(**_JIT)(_impl.jacobi_eigh)


@njit(**_JIT)
def best_split_scan(values, y):
    """Loop twin of numpy_backend.best_split_scan; identical arithmetic,
    identical tie-breaking (lowest candidate position, lowest threshold)."""
    n, m = values.shape
    best_f = -1
    best_thr = 0.0
    best_imp = np.inf
    if n < 2:
        return best_f, best_thr, best_imp
    total1 = 0
    for i in range(n):
        total1 += y[i]
    for f in range(m):
        col = values[:, f]
        order = np.argsort(col, kind="mergesort")
        c1l = 0
        for s in range(n - 1):
            c1l += y[order[s]]
            v0 = col[order[s]]
            v1 = col[order[s + 1]]
            if not (v1 > v0):
                continue
            nl = s + 1
            nr = n - nl
            c0l = nl - c1l
            c1r = total1 - c1l
            c0r = nr - c1r
            gl = 1.0 - (c0l / nl) ** 2 - (c1l / nl) ** 2
            gr = 1.0 - (c0r / nr) ** 2 - (c1r / nr) ** 2
            imp = (nl * gl + nr * gr) / n
            if imp < best_imp:
                best_imp = imp
                best_f = f
                best_thr = (v0 + v1) / 2.0
    return best_f, best_thr, best_imp


@njit(**_JIT)
def grow_tree_arrays(Xb, yb, feat_subsets, n_min):
    """Loop twin of numpy_backend.grow_tree_arrays: same stack order,
    same order-preserving partition, same 1e-12 improvement gate."""
    n_b = Xb.shape[0]
    max_nodes = feat_subsets.shape[0]
    m = feat_subsets.shape[1]
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    counts = np.zeros((max_nodes, 2), dtype=np.int64)
    idx = np.arange(n_b)
    stack_node = np.empty(max_nodes, dtype=np.int64)
    stack_lo = np.empty(max_nodes, dtype=np.int64)
    stack_hi = np.empty(max_nodes, dtype=np.int64)
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = n_b
    top = 1
    n_nodes = 1
    tmp = np.empty(n_b, dtype=np.int64)
    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        seg = hi - lo
        c1 = 0
        for s in range(lo, hi):
            c1 += yb[idx[s]]
        c0 = seg - c1
        counts[node, 0] = c0
        counts[node, 1] = c1
        if c0 == 0 or c1 == 0 or seg < n_min:
            continue
        feats = feat_subsets[node]
        sub = np.empty((seg, m))
        ys = np.empty(seg, dtype=np.int64)
        for r in range(seg):
            row = idx[lo + r]
            ys[r] = yb[row]
            for c in range(m):
                sub[r, c] = Xb[row, feats[c]]
        pos, thr, wimp = best_split_scan(sub, ys)
        if pos < 0:
            continue
        parent_imp = 1.0 - (c0 / seg) ** 2 - (c1 / seg) ** 2
        if not (wimp < parent_imp - 1e-12):
            continue
        f = feats[pos]
        nl = 0
        for s in range(lo, hi):
            if Xb[idx[s], f] <= thr:
                tmp[nl] = idx[s]
                nl += 1
        nr = nl
        for s in range(lo, hi):
            if not (Xb[idx[s], f] <= thr):
                tmp[nr] = idx[s]
                nr += 1
        for s in range(seg):
            idx[lo + s] = tmp[s]
        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        feature[node] = f
        threshold[node] = thr
        left[node] = lchild
        right[node] = rchild
        stack_node[top] = rchild
        stack_lo[top] = lo + nl
        stack_hi[top] = hi
        top += 1
        stack_node[top] = lchild
        stack_lo[top] = lo
        stack_hi[top] = lo + nl
        top += 1
    return feature, threshold, left, right, counts, n_nodes


@njit(**_JIT)
def tree_predict(feat, thr, left, right, leaf_class, root, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for r in range(n):
        node = root
        while feat[node] >= 0:
            if X[r, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = leaf_class[node]
    return out


@njit(**_JIT)
def forest_vote_counts(feat, thr, left, right, leaf_class, roots, X):
    n = X.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    for t in range(roots.shape[0]):
        root = roots[t]
        for r in range(n):
            node = root
            while feat[node] >= 0:
                if X[r, feat[node]] <= thr[node]:
                    node = left[node]
                else:
                    node = right[node]
            counts[r] += leaf_class[node]
    return counts
