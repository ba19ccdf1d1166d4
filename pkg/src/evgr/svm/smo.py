"""Linear soft-margin SVM trained with Platt's Sequential Minimal Optimization.

The pair-update loop lives in a compiled extension when available and in a
pure-Python twin otherwise (:data:`BACKEND` reports which one was loaded).
Everything else here is shared: label mapping, the Gram matrix, the final
bias, weight recovery and the dual objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import CorruptBundle, DimensionMismatch, SingleClassInput, VersionMismatch
from ..features import FeatureConfig, FeatureVector, to_matrix
from ..rubric import Concept
from . import _smo_py

try:
    from . import _smo_kernel
except ImportError:  # extension not built
    _smo_kernel = None

BACKEND = "cython" if _smo_kernel is not None else "python"
MODEL_VERSION = 1
_N_RANDOM = 1024


def _kernel_for(backend: str):
    if backend == "auto":
        backend = BACKEND
    if backend == "cython":
        if _smo_kernel is None:
            raise RuntimeError("compiled SMO kernel is not available; rebuild the package or use backend='python'")
        return _smo_kernel.solve
    if backend == "python":
        return _smo_py.solve
    raise ValueError(f"unknown backend {backend!r}")


@dataclass(frozen=True)
class SmoParams:
    c: float = 1.0
    kkt_tolerance: float = 1e-3
    alpha_epsilon: float = 1e-5
    max_passes: int = 10
    max_iterations: int = 100_000
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not (self.c > 0 and self.kkt_tolerance > 0 and self.alpha_epsilon > 0):
            raise ValueError("c, kkt_tolerance and alpha_epsilon must be positive")
        if self.max_passes < 1 or self.max_iterations < 1:
            raise ValueError("max_passes and max_iterations must be positive")
        if self.kkt_tolerance >= 1:
            raise ValueError("kkt_tolerance must be < 1")
        if self.alpha_epsilon >= self.c:
            raise ValueError("alpha_epsilon must be < c")

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "kkt_tolerance": self.kkt_tolerance,
            "alpha_epsilon": self.alpha_epsilon,
            "max_passes": self.max_passes,
            "max_iterations": self.max_iterations,
            "rng_seed": self.rng_seed,
        }


@dataclass(frozen=True)
class TrainingMeta:
    n_samples: int
    n_positive: int
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "n_positive": self.n_positive,
            "iterations": self.iterations,
            "converged": self.converged,
        }


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray
    bias: float
    concept: Concept | None = None
    config: FeatureConfig = field(default_factory=FeatureConfig)
    vocab_fingerprint: str = ""
    training_meta: TrainingMeta = TrainingMeta(0, 0, 0, True)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or not np.all(np.isfinite(w)) or not math.isfinite(self.bias):
            raise ValueError("model weights and bias must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))
        if self.concept is not None:
            object.__setattr__(self, "concept", Concept(self.concept))

    @property
    def dimension(self) -> int:
        return len(self.weights)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearModel):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and self.bias == other.bias
            and self.concept == other.concept
            and self.config == other.config
            and self.vocab_fingerprint == other.vocab_fingerprint
            and self.training_meta == other.training_meta
        )

    def to_dict(self) -> dict:
        nz = np.flatnonzero(self.weights)
        return {
            "version": MODEL_VERSION,
            "concept": self.concept.value if self.concept is not None else None,
            "dimension": self.dimension,
            "weights": [[int(i), float(self.weights[i])] for i in nz],
            "bias": self.bias,
            "vocab_fingerprint": self.vocab_fingerprint,
            "config": self.config.to_dict(),
            "training_meta": self.training_meta.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> LinearModel:
        if d.get("version") != MODEL_VERSION:
            raise VersionMismatch(f"model version {d.get('version')!r}, expected {MODEL_VERSION}")
        try:
            w = np.zeros(int(d["dimension"]))
            for i, v in d["weights"]:
                w[int(i)] = float(v)
            return cls(
                weights=w,
                bias=float(d["bias"]),
                concept=Concept(d["concept"]) if d["concept"] is not None else None,
                config=FeatureConfig.from_dict(d["config"]),
                vocab_fingerprint=d["vocab_fingerprint"],
                training_meta=TrainingMeta(**d["training_meta"]),
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise CorruptBundle(f"malformed model document: {exc}") from exc


@dataclass(frozen=True, eq=False)
class DualSolution:
    alphas: np.ndarray
    bias: float
    objective: float


def _as_matrix(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        X = np.asarray(vectors, dtype=np.float64)
        if X.ndim != 2:
            raise DimensionMismatch("expected a 2-D array of samples")
        return X
    vectors = list(vectors)
    if vectors and isinstance(vectors[0], FeatureVector):
        return to_matrix(vectors)
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("all vectors must share one dimension")
    return X


def _signed(labels: Sequence[int]) -> np.ndarray:
    lab = np.asarray(labels)
    if not np.all((lab == 0) | (lab == 1)):
        raise ValueError("labels must be 0 or 1")
    return np.where(lab == 1, 1.0, -1.0)


def dual_objective(K: np.ndarray, y: np.ndarray, alphas: np.ndarray) -> float:
    """``sum(alpha) - 0.5 * (alpha*y)' K (alpha*y)``."""
    ay = alphas * y
    return float(alphas.sum() - 0.5 * ay @ K @ ay)


def _bias_interval(u, y, alphas, c, tol):
    """Range of ``b`` for which every sample meets its KKT condition within ``tol``."""
    lo, hi = -np.inf, np.inf
    for ui, yi, a in zip(u, y, alphas):
        # margin y*(u+b) must lie in [low_m, high_m]
        low_m = 1.0 - tol if a < c else -np.inf
        high_m = 1.0 + tol if a > 0.0 else np.inf
        if yi > 0:
            lo, hi = max(lo, low_m - ui), min(hi, high_m - ui)
        else:
            lo, hi = max(lo, -high_m - ui), min(hi, -low_m - ui)
    return lo, hi


def final_bias(u: np.ndarray, y: np.ndarray, alphas: np.ndarray, c: float, tol: float | None = None) -> float:
    """Bias from the non-bound support vectors, else the middle of the feasible interval.

    ``u`` holds the bias-free decision values ``w . x_i``. With ``tol`` given,
    the result is clamped into the interval where the KKT certificate holds
    at that tolerance, whenever that interval is non-empty.
    """
    b = _rule_bias(u, y, alphas, c)
    if tol is not None:
        # aim slightly inside so roundoff in recomputed margins cannot tip over
        for t in (0.999 * tol, tol):
            lo, hi = _bias_interval(u, y, alphas, c, t)
            if lo <= hi:
                b = float(min(max(b, lo), hi))
                break
    return b


def _rule_bias(u, y, alphas, c) -> float:
    free = (alphas > 0.0) & (alphas < c)
    if free.any():
        return float(np.mean(y[free] - u[free]))
    # bound points constrain b from one side each
    at_zero = alphas <= 0.0
    at_c = ~at_zero & ~free
    lower = np.concatenate([
        (1.0 - u)[at_zero & (y > 0)],
        (-1.0 - u)[at_c & (y < 0)],
    ])
    upper = np.concatenate([
        (-1.0 - u)[at_zero & (y < 0)],
        (1.0 - u)[at_c & (y > 0)],
    ])
    lo = lower.max() if len(lower) else None
    hi = upper.min() if len(upper) else None
    if lo is None and hi is None:
        return 0.0
    if lo is None:
        return float(hi)
    if hi is None:
        return float(lo)
    return float(0.5 * (lo + hi))


def kkt_violation(X, labels, alphas, bias, c) -> float:
    """Largest KKT violation of a dual solution; zero means an exact optimum."""
    X = _as_matrix(X)
    y = _signed(labels)
    yf = y * (X @ (X.T @ (alphas * y)) + bias)
    worst = 0.0
    for a, m in zip(alphas, yf):
        if a <= 0.0:
            worst = max(worst, 1.0 - m)
        elif a >= c:
            worst = max(worst, m - 1.0)
        else:
            worst = max(worst, abs(m - 1.0))
    return float(worst)


@dataclass
class SolverTrace:
    """Per-step record from a traced run: objective, sum(alpha*y), min/max alpha."""

    steps: np.ndarray
    full_passes: int


def train_smo(
    vectors,
    labels: Sequence[int],
    params: SmoParams = SmoParams(),
    *,
    concept: Concept | None = None,
    config: FeatureConfig | None = None,
    vocab_fingerprint: str = "",
    backend: str = "auto",
    trace: bool = False,
):
    """Train a linear SVM by SMO.

    ``vectors`` may be :class:`FeatureVector` objects or a dense 2-D array;
    ``labels`` are 0/1 and are mapped to -1/+1. Returns ``(model, dual)``,
    plus a :class:`SolverTrace` when ``trace=True``.
    """
    X = _as_matrix(vectors)
    if len(labels) != X.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} vectors but {len(labels)} labels")
    if X.shape[0] < 2:
        raise SingleClassInput("need at least two samples")
    y = _signed(labels)
    if np.all(y == y[0]):
        raise SingleClassInput("all labels belong to one class")

    K = X @ X.T
    rand = np.random.default_rng(params.rng_seed).integers(0, 2**62, size=_N_RANDOM, dtype=np.int64)
    solve = _kernel_for(backend)
    alphas, _, iterations, full_passes, converged, steps = solve(
        K, y, params.c, params.kkt_tolerance, params.alpha_epsilon,
        params.max_passes, params.max_iterations, rand, trace,
    )
    ay = alphas * y
    weights = X.T @ ay
    bias = final_bias(K @ ay, y, alphas, params.c, params.kkt_tolerance)
    model = LinearModel(
        weights=weights,
        bias=bias,
        concept=concept,
        config=config if config is not None else FeatureConfig(),
        vocab_fingerprint=vocab_fingerprint,
        training_meta=TrainingMeta(
            n_samples=int(X.shape[0]),
            n_positive=int((y > 0).sum()),
            iterations=int(iterations),
            converged=bool(converged),
        ),
    )
    dual = DualSolution(alphas=alphas, bias=bias, objective=dual_objective(K, y, alphas))
    if trace:
        return model, dual, SolverTrace(steps, full_passes)
    return model, dual


def predict(model: LinearModel, x) -> tuple[int, float]:
    """Return ``(label, margin)``; a margin of exactly zero maps to label 0."""
    if isinstance(x, FeatureVector):
        if x.dimension != model.dimension:
            raise DimensionMismatch(f"vector dimension {x.dimension} != model dimension {model.dimension}")
        margin = x.dot(model.weights) + model.bias
    else:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (model.dimension,):
            raise DimensionMismatch(f"vector shape {x.shape} != ({model.dimension},)")
        margin = float(x @ model.weights) + model.bias
    return (1 if margin > 0.0 else 0), float(margin)
