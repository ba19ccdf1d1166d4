"""Pure-Python SMO pair-update loop.

Mirrors ``_smo_kernel.pyx`` operation for operation so both backends take
the same path on the same inputs. Works on a precomputed Gram matrix with
an output cache ``u[k] = sum_j alpha_j y_j K[j, k]``; the decision value is
``u[k] + b``.
"""

from __future__ import annotations

import numpy as np

# values within SNAP*c of a box edge are roundoff, not a real interior alpha
SNAP = 1e-12


def solve(K, y, c, tol, eps, max_passes, max_iter, rand, trace=False):
    n = len(y)
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    alpha = np.zeros(n)
    u = np.zeros(n)
    state = {"b": 0.0, "obj": 0.0, "iters": 0, "rpos": 0}
    rows = [] if trace else None
    n_rand = len(rand)

    def next_rand():
        r = int(rand[state["rpos"] % n_rand])
        state["rpos"] += 1
        return r

    def delta_obj(i1, i2, d1, d2):
        y1, y2 = y[i1], y[i2]
        return (
            d1 + d2
            - y1 * d1 * u[i1]
            - y2 * d2 * u[i2]
            - 0.5 * (d1 * d1 * K[i1, i1] + d2 * d2 * K[i2, i2] + 2.0 * y1 * y2 * d1 * d2 * K[i1, i2])
        )

    def take_step(i1, i2):
        if i1 == i2:
            return False
        a1o, a2o = alpha[i1], alpha[i2]
        y1, y2 = y[i1], y[i2]
        b = state["b"]
        e1 = u[i1] + b - y1
        e2 = u[i2] + b - y2
        s = y1 * y2
        if y1 != y2:
            lo = max(0.0, a2o - a1o)
            hi = min(c, c + a2o - a1o)
        else:
            lo = max(0.0, a1o + a2o - c)
            hi = min(c, a1o + a2o)
        if lo >= hi:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0.0:
            a2 = a2o + y2 * (e1 - e2) / eta
            if a2 < lo:
                a2 = lo
            elif a2 > hi:
                a2 = hi
        else:
            lobj = delta_obj(i1, i2, s * (a2o - lo), lo - a2o)
            hobj = delta_obj(i1, i2, s * (a2o - hi), hi - a2o)
            if lobj > hobj + eps:
                a2 = lo
            elif lobj < hobj - eps:
                a2 = hi
            else:
                a2 = a2o
        snap = SNAP * c
        if a2 < snap:
            a2 = 0.0
        elif a2 > c - snap:
            a2 = c
        if abs(a2 - a2o) < eps * (a2 + a2o + eps):
            return False
        a1 = a1o + s * (a2o - a2)
        if a1 < snap:
            a1 = 0.0
        elif a1 > c - snap:
            a1 = c
        d1 = a1 - a1o
        d2 = a2 - a2o
        state["obj"] += delta_obj(i1, i2, d1, d2)

        t1 = y1 * d1
        t2 = y2 * d2
        b1 = b - e1 - t1 * k11 - t2 * k12
        b2 = b - e2 - t1 * k12 - t2 * k22
        if 0.0 < a1 < c:
            state["b"] = b1
        elif 0.0 < a2 < c:
            state["b"] = b2
        else:
            state["b"] = 0.5 * (b1 + b2)

        u[:] = u + t1 * K[i1]
        u[:] = u + t2 * K[i2]
        alpha[i1] = a1
        alpha[i2] = a2
        state["iters"] += 1
        if rows is not None:
            eq = 0.0
            for k in range(n):
                eq += alpha[k] * y[k]
            rows.append((state["obj"], eq, alpha.min(), alpha.max()))
        return True

    def examine(i2):
        y2 = y[i2]
        a2 = alpha[i2]
        e2 = u[i2] + state["b"] - y2
        r2 = e2 * y2
        if not ((r2 < -tol and a2 < c) or (r2 > tol and a2 > 0.0)):
            return 0
        nonbound = np.flatnonzero((alpha > 0.0) & (alpha < c))
        if len(nonbound) > 1:
            errs = u[nonbound] + state["b"] - y[nonbound]
            i1 = int(nonbound[np.argmax(np.abs(errs - e2))])
            if take_step(i1, i2):
                return 1
        start = next_rand() % n
        for k in range(n):
            i1 = (start + k) % n
            if 0.0 < alpha[i1] < c and take_step(i1, i2):
                return 1
        start = next_rand() % n
        for k in range(n):
            if take_step((start + k) % n, i2):
                return 1
        return 0

    num_changed = 0
    examine_all = True
    full_passes = 0
    converged = False
    while True:
        if num_changed == 0 and not examine_all:
            converged = True
            break
        if state["iters"] >= max_iter:
            break
        num_changed = 0
        if examine_all:
            if full_passes >= max_passes:
                break
            full_passes += 1
            for i in range(n):
                num_changed += examine(i)
                if state["iters"] >= max_iter:
                    break
        else:
            for i in range(n):
                if 0.0 < alpha[i] < c:
                    num_changed += examine(i)
                    if state["iters"] >= max_iter:
                        break
        if examine_all:
            examine_all = False
        elif num_changed == 0:
            examine_all = True

    trace_arr = np.array(rows, dtype=np.float64).reshape(-1, 4) if rows is not None else None
    return alpha, state["b"], state["iters"], full_passes, converged, trace_arr
