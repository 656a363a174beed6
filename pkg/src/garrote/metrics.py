"""Evaluation measures: MSE, L1 reconstruction error, support size, ROC-AUC."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .baselines import BaselineSolution
from .solver import VgSolution


def solution_vector(solution) -> np.ndarray:
    """Effective coefficient vector: m_i w_i for VG, w for ridge/lasso."""
    if isinstance(solution, VgSolution):
        return solution.m * solution.w
    return np.asarray(solution.w, dtype=float)


def l1_error(v: np.ndarray, w_true: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    w_true = np.asarray(w_true, dtype=float)
    if v.shape != w_true.shape:
        raise ValueError("length mismatch")
    return float(np.sum(np.abs(v - w_true)))


def nonzero_count(solution) -> int | None:
    """Support size: m_i > 0.5 (strict) for VG, exact nonzeros for lasso.

    Ridge has no meaningful support and reports None.
    """
    if isinstance(solution, VgSolution):
        return int(np.sum(solution.m > 0.5))
    if isinstance(solution, BaselineSolution) and solution.method == "ridge":
        return None
    return int(np.sum(solution.w != 0.0))


def mse(y_pred: np.ndarray, y_true: np.ndarray) -> float:
    y_pred = np.asarray(y_pred, dtype=float)
    y_true = np.asarray(y_true, dtype=float)
    if y_pred.shape != y_true.shape:
        raise ValueError("length mismatch")
    return float(np.mean((y_pred - y_true) ** 2))


def roc_auc(v: np.ndarray, w_true: np.ndarray) -> float:
    """AUC of ranking |v_i| against the active/inactive truth labels.

    Mann-Whitney rank form with average ranks, so ties contribute 1/2;
    identical to sweeping all thresholds on the ROC curve.
    """
    scores = np.abs(np.asarray(v, dtype=float))
    labels = np.asarray(w_true, dtype=float) != 0.0
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("truth must contain at least one active and one inactive feature")
    ranks = rankdata(scores)
    u = float(ranks[labels].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


@dataclass(frozen=True)
class EvalReport:
    method: str
    train_mse: float
    val_mse: float
    test_mse: float
    l1_error: float
    nonzero: int | None
    roc_auc: float | None

    def row(self) -> str:
        nz = "-" if self.nonzero is None else str(self.nonzero)
        auc = "-" if self.roc_auc is None else f"{self.roc_auc:.6g}"
        return (
            f"{self.method}\t{self.train_mse:.6g}\t{self.val_mse:.6g}"
            f"\t{self.test_mse:.6g}\t{self.l1_error:.6g}\t{nz}\t{auc}"
        )

    @staticmethod
    def header() -> str:
        return "# method\ttrain_mse\tval_mse\ttest_mse\tl1_error\tnonzero\troc_auc"


def report_table(reports: list[EvalReport]) -> str:
    buf = io.StringIO()
    buf.write(EvalReport.header() + "\n")
    for r in reports:
        buf.write(r.row() + "\n")
    return buf.getvalue()
