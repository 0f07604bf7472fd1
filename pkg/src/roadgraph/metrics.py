"""Binary-classification scoring: confusion counts, accuracy, AUC, MCC.

AUC is computed rank-based (the Mann-Whitney statistic): the probability
that a positive sample outscores a random negative one, with ties worth
one half.  MCC follows the standard formula with the zero-denominator
convention of 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedAUC

Confusion = tuple[int, int, int, int]  # (tp, tn, fp, fn)


@dataclass(frozen=True)
class Scores:
    """Evaluation results; ``confusion`` is (tp, tn, fp, fn)."""

    accuracy: float
    auc: float | None
    mcc: float
    fpr: float
    fnr: float
    confusion: Confusion
    per_fold: tuple["Scores", ...] | None = None

    def to_json(self) -> dict:
        entry = {
            "accuracy": self.accuracy,
            "auc": self.auc,
            "mcc": self.mcc,
            "fpr": self.fpr,
            "fnr": self.fnr,
            "confusion": {"tp": self.confusion[0], "tn": self.confusion[1],
                          "fp": self.confusion[2], "fn": self.confusion[3]},
        }
        if self.per_fold is not None:
            entry["per_fold"] = [s.to_json() for s in self.per_fold]
        return entry


def confusion_counts(predictions, labels) -> Confusion:
    tp = tn = fp = fn = 0
    for pred, label in zip(predictions, labels, strict=True):
        if label == 1:
            if pred == 1:
                tp += 1
            else:
                fn += 1
        else:
            if pred == 1:
                fp += 1
            else:
                tn += 1
    return tp, tn, fp, fn


def auc(scores, labels) -> float:
    """Rank-based AUC; raises UndefinedAUC when one class is absent."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUC("AUC needs both a positive and a negative sample")
    order = np.argsort(s, kind="stable")
    ranks = np.empty(len(s), dtype=np.float64)
    # Average ranks over tied score groups keep the tie contribution at 1/2.
    i = 0
    sorted_scores = s[order]
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_sum = float(ranks[y == 1].sum())
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def mcc(confusion: Confusion) -> float:
    """Matthews correlation coefficient; any zero factor yields 0."""
    tp, tn, fp, fn = confusion
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


def scores_from_predictions(predictions, probabilities, labels) -> Scores:
    """Assemble a Scores record; AUC is None when only one class appears."""
    conf = confusion_counts(predictions, labels)
    tp, tn, fp, fn = conf
    total = tp + tn + fp + fn
    accuracy = (tp + tn) / total if total else 0.0
    fpr = fp / (fp + tn) if (fp + tn) else 0.0
    fnr = fn / (fn + tp) if (fn + tp) else 0.0
    try:
        auc_value: float | None = auc(probabilities, labels)
    except UndefinedAUC:
        auc_value = None
    return Scores(accuracy=accuracy, auc=auc_value, mcc=mcc(conf),
                  fpr=fpr, fnr=fnr, confusion=conf)
