from .oracle import qp_oracle
from .smo import (
    BACKEND,
    DualSolution,
    LinearModel,
    SmoParams,
    SolverTrace,
    TrainingMeta,
    dual_objective,
    kkt_violation,
    predict,
    train_smo,
)

__all__ = [
    "BACKEND",
    "DualSolution",
    "LinearModel",
    "SmoParams",
    "SolverTrace",
    "TrainingMeta",
    "dual_objective",
    "kkt_violation",
    "predict",
    "qp_oracle",
    "train_smo",
]
