"""Shared kernel bodies.

Every function here is written in nopython-compatible numpy so the exact
same source runs interpreted (numpy backend) or under numba's @njit
(numba backend). Keeping one body per kernel guarantees both backends
perform the identical floating-point operations in the identical order.
"""

import numpy as np


def smo_solve(K, y, C, tol, max_iter):
    """Solve the soft-margin SVM dual by pairwise updates on the
    maximal-violating pair.

    K is the (n, n) Gram matrix, y the labels in {+1, -1} as float64.
    Returns (alpha, bias, iterations, gap) where gap is the final KKT
    violation max(I_up) - min(I_low); gap <= tol means converged.
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    # gradient of the dual objective W(a) = sum(a) - 0.5 a' Q a
    g = np.ones(n)
    it = 0
    gap = np.inf
    upper = np.where(y > 0.0, C, 0.0)
    lower = np.where(y > 0.0, 0.0, -C)
    while it < max_iter:
        ya = y * alpha
        yg = y * g
        crit_up = np.where(ya < upper, yg, -np.inf)
        crit_low = np.where(ya > lower, yg, np.inf)
        i = int(np.argmax(crit_up))
        j = int(np.argmin(crit_low))
        gap = crit_up[i] - crit_low[j]
        if gap <= tol:
            break
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta < 1e-12:
            eta = 1e-12
        step = gap / eta
        room_i = upper[i] - ya[i]
        room_j = ya[j] - lower[j]
        if room_i < step:
            step = room_i
        if room_j < step:
            step = room_j
        g += step * y * (K[j] - K[i])
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        it += 1
    # bias from the free support vectors; fall back to the bound midpoint
    yg = y * g
    free = (alpha > 1e-8 * C) & (alpha < C * (1.0 - 1e-8))
    n_free = int(free.sum())
    if n_free > 0:
        # sequential sum so the compiled and interpreted paths agree bitwise
        acc = 0.0
        for t in range(n):
            if free[t]:
                acc += yg[t]
        bias = acc / n_free
    else:
        ya = y * alpha
        hi = np.max(np.where(ya < upper, yg, -np.inf))
        lo = np.min(np.where(ya > lower, yg, np.inf))
        bias = 0.5 * (hi + lo)
    return alpha, bias, it, gap


def mlp_train(X, y, w1, b1, w2, b2, lr, epochs):
    """Full-batch gradient descent on mean binary cross-entropy.

    Parameters are updated in place; returns the per-epoch loss curve.
    Layer shapes: w1 (h, q), b1 (h,), w2 (h,), b2 scalar inside b2arr (1,).
    """
    n = X.shape[0]
    losses = np.empty(epochs)
    for e in range(epochs):
        z1 = np.dot(X, w1.T) + b1
        a1 = np.tanh(z1)
        f2 = np.dot(a1, w2) + b2[0]
        t = np.exp(-np.abs(f2))
        p = np.where(f2 >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))
        pc = np.minimum(np.maximum(p, 1e-12), 1.0 - 1e-12)
        losses[e] = -np.sum(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)) / n
        d2 = (p - y) / n
        gw2 = np.dot(d2, a1)
        gb2 = np.sum(d2)
        d1 = np.outer(d2, w2) * (1.0 - a1 * a1)
        gw1 = np.dot(d1.T, X)
        gb1 = np.sum(d1, axis=0)
        w1 -= lr * gw1
        b1 -= lr * gb1
        w2 -= lr * gw2
        b2[0] -= lr * gb2
    return losses


def jacobi_eigh(S, tol, max_sweeps):
    """Cyclic Jacobi rotations for a dense symmetric matrix.

    Returns (eigenvalues unsorted, eigenvector columns, final off-diagonal
    maximum, sweeps performed).
    """
    p = S.shape[0]
    A = S.copy()
    V = np.eye(p)
    sweeps = 0
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(p - 1):
            for j in range(i + 1, p):
                a = abs(A[i, j])
                if a > off:
                    off = a
        if off <= tol:
            break
        sweeps += 1
        for i in range(p - 1):
            for j in range(i + 1, p):
                if A[i, j] == 0.0:
                    continue
                theta = (A[j, j] - A[i, i]) / (2.0 * A[i, j])
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(p):
                    aik = A[i, k]
                    ajk = A[j, k]
                    A[i, k] = c * aik - s * ajk
                    A[j, k] = s * aik + c * ajk
                for k in range(p):
                    aki = A[k, i]
                    akj = A[k, j]
                    A[k, i] = c * aki - s * akj
                    A[k, j] = s * aki + c * akj
                for k in range(p):
                    vki = V[k, i]
                    vkj = V[k, j]
                    V[k, i] = c * vki - s * vkj
                    V[k, j] = s * vki + c * vkj
    off = 0.0
    for i in range(p - 1):
        for j in range(i + 1, p):
            a = abs(A[i, j])
            if a > off:
                off = a
    vals = np.empty(p)
    for i in range(p):
        vals[i] = A[i, i]
    return vals, V, off, sweeps
