"""Reference dual solver for small SVM instances.

Independent of the SMO code path: accelerated projected-gradient ascent on
the full dual, followed by an active-set polish that solves the KKT system of
the free variables exactly. Test-scale only.
"""

from __future__ import annotations

import numpy as np

from ..errors import SingleClassInput, SizeLimitExceeded
from .smo import DualSolution, _as_matrix, _signed, dual_objective, final_bias

MAX_ORACLE_SIZE = 12


def _project(v: np.ndarray, y: np.ndarray, c: float) -> np.ndarray:
    """Euclidean projection onto ``{0 <= a <= c, a . y = 0}``.

    ``sum(y * clip(v - lam*y))`` is non-increasing in ``lam``; bisect for its root.
    """
    def g(lam):
        return float(y @ np.clip(v - lam * y, 0.0, c))

    lo, hi = -1.0, 1.0
    while g(lo) < 0.0:
        lo *= 2.0
    while g(hi) > 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, abs(mid)):
            break
    return np.clip(v - 0.5 * (lo + hi) * y, 0.0, c)


def _polish(Q: np.ndarray, y: np.ndarray, c: float, a: np.ndarray, tol: float) -> np.ndarray | None:
    """Fix near-bound variables at their bound and solve for the rest exactly."""
    fixed = np.where(a < tol * c, 0.0, np.where(a > c - tol * c, c, np.nan))
    free = np.isnan(fixed)
    out = np.where(free, 0.0, fixed)
    f = np.flatnonzero(free)
    if len(f) == 0:
        return out if abs(y @ out) < 1e-12 else None
    b_idx = np.flatnonzero(~free)
    # stationarity on the free set: Q_ff a_f + y_f nu = 1 - Q_fb a_b, with y_f . a_f = -y_b . a_b
    m = len(f)
    A = np.zeros((m + 1, m + 1))
    A[:m, :m] = Q[np.ix_(f, f)]
    A[:m, m] = y[f]
    A[m, :m] = y[f]
    rhs = np.empty(m + 1)
    rhs[:m] = 1.0 - Q[np.ix_(f, b_idx)] @ out[b_idx]
    rhs[m] = -(y[b_idx] @ out[b_idx])
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    out[f] = sol[:m]
    if np.any(out < -1e-12) or np.any(out > c + 1e-12) or abs(y @ out) > 1e-9:
        return None
    return np.clip(out, 0.0, c)


def _certificate_gap(Q: np.ndarray, y: np.ndarray, c: float, a: np.ndarray) -> float:
    """Maximal violating-pair gap; a feasible point is optimal iff this is <= 0."""
    g = -(y * (Q @ a - 1.0))
    up = ((a < c) & (y > 0)) | ((a > 0) & (y < 0))
    low = ((a < c) & (y < 0)) | ((a > 0) & (y > 0))
    if not up.any() or not low.any():
        return 0.0
    return float(g[up].max() - g[low].min())


def qp_oracle(vectors, labels, c: float, *, max_iter: int = 20000) -> DualSolution:
    """Maximize the SVM dual for ``n <= 12`` samples."""
    X = _as_matrix(vectors)
    n = X.shape[0]
    if n > MAX_ORACLE_SIZE:
        raise SizeLimitExceeded(f"qp_oracle handles at most {MAX_ORACLE_SIZE} samples, got {n}")
    y = _signed(labels)
    if n < 2 or np.all(y == y[0]):
        raise SingleClassInput("oracle needs both classes")
    K = X @ X.T
    Q = (y[:, None] * y[None, :]) * K
    lip = max(float(np.linalg.eigvalsh(Q).max()), 1e-12)
    step = 1.0 / lip
    certified = 1e-9 * max(1.0, lip * c)

    def polished(point):
        for tol in (1e-9, 1e-7, 1e-5, 1e-3):
            cand = _polish(Q, y, c, point, tol)
            if cand is not None and _certificate_gap(Q, y, c, cand) <= certified:
                return cand
        # singular free block: the iterate itself may already be optimal
        if abs(y @ point) <= 1e-12 and _certificate_gap(Q, y, c, point) <= certified:
            return point
        return None

    a = np.zeros(n)
    z = a.copy()
    t = 1.0
    best = None
    for it in range(1, max_iter + 1):
        a_next = _project(z + step * (1.0 - Q @ z), y, c)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = a_next + ((t - 1.0) / t_next) * (a_next - a)
        moved = float(np.max(np.abs(a_next - a)))
        a, t = a_next, t_next
        if it % 25 == 0 or moved < 1e-14:
            best = polished(a)
            if best is not None:
                break
    if best is None:
        best = a
    bias = final_bias(K @ (best * y), y, best, c)
    return DualSolution(alphas=best, bias=bias, objective=dual_objective(K, y, best))
