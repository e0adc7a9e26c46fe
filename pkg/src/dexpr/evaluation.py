"""Classification metrics, dispersion statistics and model-complexity measures.

The complexity measures compare a model against a target of roughly ten
rules of five clauses each (and five trees for forests); rule length enters
squared because long rules hurt readability more than many rules.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

__all__ = [
    "KNN_K_VALUES",
    "Confusion",
    "comprehensibility_rate",
    "confusion",
    "dispersion",
    "dt_complexity",
    "knn_comprehensibility",
    "metrics",
    "rf_complexity",
    "roc_auc",
]

KNN_K_VALUES = (5, 7, 9, 10, 25)


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError(f"negative count in {self}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(y_true, y_pred) -> Confusion:
    t = np.asarray(y_true, dtype=bool)
    p = np.asarray(y_pred, dtype=bool)
    return Confusion(
        int((t & p).sum()), int((~t & p).sum()), int((~t & ~p).sum()), int((t & ~p).sum())
    )


def metrics(c: Confusion) -> dict[str, float]:
    """Accuracy, precision, recall and f1; empty denominators give 0."""
    if c.total <= 0:
        raise ValueError("no instances to evaluate")
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {
        "accuracy": (c.tp + c.tn) / c.total,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC; tied scores count one half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=bool)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_auc needs both classes")
    ranks = rankdata(s)
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def dispersion(values: Sequence[float]) -> dict[str, float]:
    """Range, IQR (linear-interpolation quartiles), sample std and CV in percent.

    CV is NaN when the mean is zero.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ValueError("dispersion needs at least 2 values")
    q1, q3 = np.percentile(v, [25, 75])
    # statistics works in exact arithmetic, so a constant series has std exactly 0
    std = statistics.stdev(v.tolist())
    mean = statistics.fmean(v.tolist())
    return {
        "range": float(v.max() - v.min()),
        "iqr": float(q3 - q1),
        "std": std,
        "cv": 100.0 * std / mean if mean != 0 else math.nan,
    }


def knn_comprehensibility(f1_by_k: Mapping[int, float]) -> float:
    """Sum over k of f1(k) / k."""
    if any(k <= 0 for k in f1_by_k):
        raise ValueError("neighbour counts must be positive")
    return float(sum(f1 / k for k, f1 in f1_by_k.items()))


def dt_complexity(
    rules: float, mean_clauses: float, baseline_rules: float = 10, baseline_clauses: float = 5
) -> float:
    return (rules / baseline_rules) * (mean_clauses / baseline_clauses) ** 2


def rf_complexity(
    trees: float,
    mean_rules: float,
    mean_clauses: float,
    baseline_trees: float = 5,
    baseline_rules: float = 10,
    baseline_clauses: float = 5,
) -> float:
    return (trees * mean_rules) / (baseline_trees * baseline_rules) * (mean_clauses / baseline_clauses) ** 2


def comprehensibility_rate(f1: float, complexity: float) -> float:
    """100 * f1 / complexity."""
    if complexity == 0:
        raise ZeroDivisionError("complexity is zero")
    return 100.0 * f1 / complexity
