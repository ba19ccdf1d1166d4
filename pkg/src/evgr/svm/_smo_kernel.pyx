# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled SMO pair-update loop.

Operation-for-operation twin of ``_smo_py.solve``; keep the two in step.
The loop runs without the GIL so per-concept trainings can overlap in threads.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

# keep equal to _smo_py.SNAP
cdef double SNAP = 1e-12


cdef struct State:
    double b
    double obj
    long iters
    long rpos
    long n_trace
    int tracing


cdef inline double _delta_obj(const double[:, ::1] K, const double[::1] y, double[::1] u,
                              Py_ssize_t i1, Py_ssize_t i2, double d1, double d2) noexcept nogil:
    cdef double y1 = y[i1], y2 = y[i2]
    return (
        d1 + d2
        - y1 * d1 * u[i1]
        - y2 * d2 * u[i2]
        - 0.5 * (d1 * d1 * K[i1, i1] + d2 * d2 * K[i2, i2] + 2.0 * y1 * y2 * d1 * d2 * K[i1, i2])
    )


cdef int _take_step(const double[:, ::1] K, const double[::1] y, double[::1] alpha, double[::1] u,
                    double c, double eps, State* st, double[:, ::1] trace,
                    Py_ssize_t i1, Py_ssize_t i2) noexcept nogil:
    cdef Py_ssize_t n = y.shape[0], k
    cdef double a1o, a2o, y1, y2, e1, e2, s, lo, hi, k11, k12, k22, eta
    cdef double snap, a1, a2, lobj, hobj, d1, d2, t1, t2, b1, b2, eq, amin, amax
    if i1 == i2:
        return 0
    a1o = alpha[i1]
    a2o = alpha[i2]
    y1 = y[i1]
    y2 = y[i2]
    e1 = u[i1] + st.b - y1
    e2 = u[i2] + st.b - y2
    s = y1 * y2
    if y1 != y2:
        lo = a2o - a1o if a2o - a1o > 0.0 else 0.0
        hi = c + a2o - a1o if c + a2o - a1o < c else c
    else:
        lo = a1o + a2o - c if a1o + a2o - c > 0.0 else 0.0
        hi = a1o + a2o if a1o + a2o < c else c
    if lo >= hi:
        return 0
    k11 = K[i1, i1]
    k12 = K[i1, i2]
    k22 = K[i2, i2]
    eta = k11 + k22 - 2.0 * k12
    if eta > 0.0:
        a2 = a2o + y2 * (e1 - e2) / eta
        if a2 < lo:
            a2 = lo
        elif a2 > hi:
            a2 = hi
    else:
        lobj = _delta_obj(K, y, u, i1, i2, s * (a2o - lo), lo - a2o)
        hobj = _delta_obj(K, y, u, i1, i2, s * (a2o - hi), hi - a2o)
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
    if fabs(a2 - a2o) < eps * (a2 + a2o + eps):
        return 0
    a1 = a1o + s * (a2o - a2)
    if a1 < snap:
        a1 = 0.0
    elif a1 > c - snap:
        a1 = c
    d1 = a1 - a1o
    d2 = a2 - a2o
    st.obj = st.obj + _delta_obj(K, y, u, i1, i2, d1, d2)

    t1 = y1 * d1
    t2 = y2 * d2
    b1 = st.b - e1 - t1 * k11 - t2 * k12
    b2 = st.b - e2 - t1 * k12 - t2 * k22
    if 0.0 < a1 < c:
        st.b = b1
    elif 0.0 < a2 < c:
        st.b = b2
    else:
        st.b = 0.5 * (b1 + b2)

    for k in range(n):
        u[k] = u[k] + t1 * K[i1, k]
    for k in range(n):
        u[k] = u[k] + t2 * K[i2, k]
    alpha[i1] = a1
    alpha[i2] = a2
    st.iters += 1
    if st.tracing and st.n_trace < trace.shape[0]:
        eq = 0.0
        amin = alpha[0]
        amax = alpha[0]
        for k in range(n):
            eq += alpha[k] * y[k]
            if alpha[k] < amin:
                amin = alpha[k]
            if alpha[k] > amax:
                amax = alpha[k]
        trace[st.n_trace, 0] = st.obj
        trace[st.n_trace, 1] = eq
        trace[st.n_trace, 2] = amin
        trace[st.n_trace, 3] = amax
        st.n_trace += 1
    return 1


cdef int _examine(const double[:, ::1] K, const double[::1] y, double[::1] alpha, double[::1] u,
                  double c, double tol, double eps, const long long[::1] rand, State* st,
                  double[:, ::1] trace, Py_ssize_t i2) noexcept nogil:
    cdef Py_ssize_t n = y.shape[0], k, i1, start, n_nonbound = 0
    cdef double y2 = y[i2], a2 = alpha[i2]
    cdef double e2 = u[i2] + st.b - y2
    cdef double r2 = e2 * y2
    cdef double best = -1.0, gap
    if not ((r2 < -tol and a2 < c) or (r2 > tol and a2 > 0.0)):
        return 0
    i1 = -1
    for k in range(n):
        if 0.0 < alpha[k] < c:
            n_nonbound += 1
            gap = fabs(((u[k] + st.b) - y[k]) - e2)
            if gap > best:
                best = gap
                i1 = k
    if n_nonbound > 1:
        if _take_step(K, y, alpha, u, c, eps, st, trace, i1, i2):
            return 1
    start = <Py_ssize_t>(rand[st.rpos % rand.shape[0]] % n)
    st.rpos += 1
    for k in range(n):
        i1 = (start + k) % n
        if 0.0 < alpha[i1] < c:
            if _take_step(K, y, alpha, u, c, eps, st, trace, i1, i2):
                return 1
    start = <Py_ssize_t>(rand[st.rpos % rand.shape[0]] % n)
    st.rpos += 1
    for k in range(n):
        if _take_step(K, y, alpha, u, c, eps, st, trace, (start + k) % n, i2):
            return 1
    return 0


def solve(K, y, double c, double tol, double eps, long max_passes, long max_iter, rand, bint trace=False):
    """Run SMO on Gram matrix ``K`` with labels ``y`` in {-1, +1}.

    Returns ``(alpha, b, iterations, full_passes, converged, trace)``.
    """
    cdef const double[:, ::1] Kv = np.ascontiguousarray(K, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const long long[::1] rv = np.ascontiguousarray(rand, dtype=np.int64)
    cdef Py_ssize_t n = yv.shape[0], i
    alpha_arr = np.zeros(n)
    u_arr = np.zeros(n)
    trace_arr = np.zeros((max_iter if trace else 0, 4))
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] u = u_arr
    cdef double[:, ::1] tr = trace_arr
    cdef State st
    cdef long num_changed = 0, full_passes = 0
    cdef bint examine_all = True, converged = False
    st.b = 0.0
    st.obj = 0.0
    st.iters = 0
    st.rpos = 0
    st.n_trace = 0
    st.tracing = 1 if trace else 0

    with nogil:
        while True:
            if num_changed == 0 and not examine_all:
                converged = True
                break
            if st.iters >= max_iter:
                break
            num_changed = 0
            if examine_all:
                if full_passes >= max_passes:
                    break
                full_passes += 1
                for i in range(n):
                    num_changed += _examine(Kv, yv, alpha, u, c, tol, eps, rv, &st, tr, i)
                    if st.iters >= max_iter:
                        break
            else:
                for i in range(n):
                    if 0.0 < alpha[i] < c:
                        num_changed += _examine(Kv, yv, alpha, u, c, tol, eps, rv, &st, tr, i)
                        if st.iters >= max_iter:
                            break
            if examine_all:
                examine_all = False
            elif num_changed == 0:
                examine_all = True

    return (
        alpha_arr,
        st.b,
        int(st.iters),
        int(full_passes),
        bool(converged),
        trace_arr[: st.n_trace].copy() if trace else None,
    )
