"""Numba coordinate-descent kernels for L1-regularized linear models.

Both kernels minimize ``sum|w| + C * sum_i loss_i`` with an unpenalized
bias, sweep coordinates in index order (bias first) and only ever accept a
step that does not increase the objective.
"""

import numpy as np
from numba import njit

_ARMIJO = 0.01
_MAX_LINE_SEARCH = 30


@njit(cache=True)
def _sqhinge_loss(z, y, C):
    total = 0.0
    for i in range(z.shape[0]):
        m = 1.0 - y[i] * z[i]
        if m > 0.0:
            total += m * m
    return C * total


@njit(cache=True)
def _sqhinge_shift_loss(z, y, col, step, C):
    total = 0.0
    for i in range(z.shape[0]):
        m = 1.0 - y[i] * (z[i] + step * col[i])
        if m > 0.0:
            total += m * m
    return C * total


@njit(cache=True)
def _max_violation(z, y):
    worst = 0.0
    for i in range(z.shape[0]):
        m = 1.0 - y[i] * z[i]
        if m > worst:
            worst = m
    return worst


@njit(cache=True)
def sqhinge_cd(X, y, C, tol, max_epochs, w, b):
    """Squared-hinge L1-SVM.  ``X`` should be Fortran-ordered.

    ``w`` and ``b`` are the starting point (usually zeros); ``w`` is updated
    in place.  Returns ``(b, objective_per_epoch)``; the first entry of the
    history is the starting objective.
    """
    n, d = X.shape
    ones = np.ones(n)
    colsum = np.zeros(d)
    for j in range(d):
        s = 0.0
        for i in range(n):
            s += abs(X[i, j])
        colsum[j] = s
    z = X @ w + b
    loss = _sqhinge_loss(z, y, C)
    l1 = np.sum(np.abs(w))
    history = np.empty(max_epochs + 1)
    history[0] = loss + l1
    epochs = 0
    for epoch in range(max_epochs):
        # bias: plain Newton step with backtracking
        g = 0.0
        h = 0.0
        for i in range(n):
            m = 1.0 - y[i] * z[i]
            if m > 0.0:
                g -= 2.0 * C * y[i] * m
                h += 2.0 * C
        if h > 0.0 and g != 0.0:
            step = -g / h
            for _ in range(_MAX_LINE_SEARCH):
                new_loss = _sqhinge_shift_loss(z, y, ones, step, C)
                if new_loss - loss <= _ARMIJO * step * g:
                    b += step
                    for i in range(n):
                        z[i] += step
                    loss = new_loss
                    break
                step *= 0.5

        worst = _max_violation(z, y)
        for j in range(d):
            wj = w[j]
            # |gradient| <= 1 keeps a zero weight at zero
            if wj == 0.0 and 2.0 * C * colsum[j] * worst <= 1.0:
                continue
            g = 0.0
            h = 0.0
            for i in range(n):
                m = 1.0 - y[i] * z[i]
                if m > 0.0:
                    xij = X[i, j]
                    g -= 2.0 * C * y[i] * xij * m
                    h += 2.0 * C * xij * xij
            if h < 1e-12:
                h = 1e-12
            if g + 1.0 <= h * wj:
                direction = -(g + 1.0) / h
            elif g - 1.0 >= h * wj:
                direction = -(g - 1.0) / h
            else:
                direction = -wj
            if direction == 0.0:
                continue
            decrease = g * direction + abs(wj + direction) - abs(wj)
            step = direction
            for _ in range(_MAX_LINE_SEARCH):
                new_loss = _sqhinge_shift_loss(z, y, X[:, j], step, C)
                change = new_loss - loss + abs(wj + step) - abs(wj)
                if change <= _ARMIJO * (step / direction) * decrease and change <= 0.0:
                    w[j] = wj + step
                    for i in range(n):
                        z[i] += step * X[i, j]
                    loss = new_loss
                    l1 += abs(wj + step) - abs(wj)
                    worst = _max_violation(z, y)
                    break
                step *= 0.5

        epochs += 1
        # fresh sums so the reported objective does not drift
        l1 = np.sum(np.abs(w))
        history[epochs] = loss + l1
        prev = history[epochs - 1]
        if prev - history[epochs] <= tol * abs(prev):
            break
    return b, history[: epochs + 1]


@njit(cache=True)
def _eps_loss(z, y, C, eps):
    total = 0.0
    for i in range(z.shape[0]):
        a = abs(y[i] - z[i]) - eps
        if a > 0.0:
            total += a
    return C * total


@njit(cache=True)
def _eps_shift_loss(z, y, col, step, C, eps):
    total = 0.0
    for i in range(z.shape[0]):
        a = abs(y[i] - z[i] - step * col[i]) - eps
        if a > 0.0:
            total += a
    return C * total


@njit(cache=True)
def _line_minimizer(z, y, col, C, eps, w_j, penalized):
    """Exact minimizer over ``t`` of ``pen*|w_j + t| + C sum_i phi(r_i - t x_i)``.

    ``phi(u) = max(0, |u| - eps)``.  The objective is convex and piecewise
    linear; walk its sorted breakpoints until the slope turns nonnegative.
    """
    n = z.shape[0]
    m = 0
    for i in range(n):
        if col[i] != 0.0:
            m += 1
    size = 2 * m + (1 if penalized else 0)
    points = np.empty(size)
    weights = np.empty(size)
    slope = 0.0
    k = 0
    for i in range(n):
        x = col[i]
        if x != 0.0:
            r = y[i] - z[i]
            a = (r - eps) / x
            c = (r + eps) / x
            wgt = C * abs(x)
            points[k] = min(a, c)
            weights[k] = wgt
            points[k + 1] = max(a, c)
            weights[k + 1] = wgt
            k += 2
            slope -= wgt
    if penalized:
        points[k] = -w_j
        weights[k] = 2.0
        slope -= 1.0
    if size == 0:
        return 0.0
    order = np.argsort(points)
    for idx in range(size):
        p = order[idx]
        slope += weights[p]
        if slope >= 0.0:
            lo = points[p]
            if slope == 0.0 and idx + 1 < size:
                hi = points[order[idx + 1]]
                # flat stretch: stay put if the current point is on it
                if lo <= 0.0 <= hi:
                    return 0.0
                return lo if lo > 0.0 else hi
            return lo
    return points[order[size - 1]]


@njit(cache=True)
def eps_insensitive_cd(X, y, C, eps, tol, max_epochs, w, b):
    """epsilon-insensitive L1 regression by exact coordinate minimization.

    Zero weights whose exact minimizer stays at zero are shelved until the
    objective stalls; the run only stops after a full sweep over every
    coordinate also stalls.
    """
    n, d = X.shape
    ones = np.ones(n)
    colsum = np.zeros(d)
    for j in range(d):
        s = 0.0
        for i in range(n):
            s += abs(X[i, j])
        colsum[j] = s
    active = np.ones(d, dtype=np.bool_)
    full_sweep = True
    z = X @ w + b
    loss = _eps_loss(z, y, C, eps)
    history = np.empty(max_epochs + 1)
    history[0] = loss + np.sum(np.abs(w))
    epochs = 0
    for epoch in range(max_epochs):
        step = _line_minimizer(z, y, ones, C, eps, 0.0, False)
        if step != 0.0:
            new_loss = _eps_shift_loss(z, y, ones, step, C, eps)
            if new_loss <= loss:
                b += step
                for i in range(n):
                    z[i] += step
                loss = new_loss
        for j in range(d):
            if not (full_sweep or active[j]):
                continue
            wj = w[j]
            # data slope is bounded by C*sum|x|; the L1 kink absorbs it
            if wj == 0.0 and C * colsum[j] <= 1.0:
                active[j] = False
                continue
            col = X[:, j]
            step = _line_minimizer(z, y, col, C, eps, wj, True)
            if step == 0.0:
                active[j] = wj != 0.0
                continue
            active[j] = True
            new_loss = _eps_shift_loss(z, y, col, step, C, eps)
            if new_loss + abs(wj + step) <= loss + abs(wj):
                w[j] = wj + step
                for i in range(n):
                    z[i] += step * col[i]
                loss = new_loss
        epochs += 1
        history[epochs] = loss + np.sum(np.abs(w))
        prev = history[epochs - 1]
        if prev - history[epochs] <= tol * abs(prev):
            if full_sweep:
                break
            full_sweep = True
        else:
            full_sweep = False
    return b, history[: epochs + 1]
