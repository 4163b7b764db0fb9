from .base import Estimator, NotFittedError
from .kernel_models import QGPR, QKRR, QSVC, QSVR, canonical_order
from .qnn import QNN, QNNTrainingError, qnn_observable
from .qrc import QRC
from .solvers import (
    SVM_TOL,
    DualSolution,
    SolverError,
    gpr_fit,
    gpr_predict,
    krr_fit,
    krr_predict,
    kkt_violation,
    svm_decision,
    svm_dual_solve,
    svr_dual_solve,
)

_REGISTRY = {cls.name: cls for cls in (QSVC, QSVR, QKRR, QGPR, QNN, QRC)}


def estimator_from_dict(d: dict) -> Estimator:
    try:
        cls = _REGISTRY[d["type"]]
    except KeyError:
        raise ValueError(f"unknown estimator type {d.get('type')!r}") from None
    return cls.from_dict(d)


__all__ = [
    "Estimator",
    "NotFittedError",
    "QSVC",
    "QSVR",
    "QKRR",
    "QGPR",
    "QNN",
    "QNNTrainingError",
    "QRC",
    "SVM_TOL",
    "DualSolution",
    "SolverError",
    "canonical_order",
    "estimator_from_dict",
    "gpr_fit",
    "gpr_predict",
    "krr_fit",
    "krr_predict",
    "kkt_violation",
    "qnn_observable",
    "svm_decision",
    "svm_dual_solve",
    "svr_dual_solve",
]
