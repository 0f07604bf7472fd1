"""AUC, MCC, and score assembly against brute-force oracles."""

from __future__ import annotations

import numpy as np
import pytest

from oracles import oracle_auc_paircount, oracle_mcc
from roadgraph.errors import UndefinedAUC
from roadgraph.metrics import Scores, auc, confusion_counts, mcc, scores_from_predictions


class TestAUC:
    def test_perfect_ranking(self):
        assert auc([0.9, 0.2], [1, 0]) == 1.0

    def test_all_ties(self):
        assert auc([0.5, 0.5], [1, 0]) == 0.5

    def test_reversed_ranking(self):
        assert auc([0.1, 0.9], [1, 0]) == 0.0

    def test_single_class_undefined(self):
        with pytest.raises(UndefinedAUC):
            auc([0.4, 0.6], [1, 1])

    def test_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            n = int(rng.integers(5, 30))
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            # Quantized scores force plenty of ties.
            scores = np.round(rng.random(n), 1)
            assert auc(scores, labels) == oracle_auc_paircount(scores, labels)


class TestMCC:
    def test_perfect(self):
        assert mcc((5, 5, 0, 0)) == 1.0

    def test_uninformative(self):
        assert mcc((1, 1, 1, 1)) == 0.0

    def test_always_wrong(self):
        assert mcc((0, 0, 5, 5)) == -1.0

    def test_zero_denominator_convention(self):
        assert mcc((0, 10, 0, 0)) == 0.0

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            tp, tn, fp, fn = (int(v) for v in rng.integers(0, 50, size=4))
            assert mcc((tp, tn, fp, fn)) == oracle_mcc(tp, tn, fp, fn)


class TestScores:
    def test_confusion_counts(self):
        preds = [1, 0, 1, 0, 1]
        labels = [1, 0, 0, 1, 1]
        assert confusion_counts(preds, labels) == (2, 1, 1, 1)

    def test_perfect_predictor(self):
        s = scores_from_predictions([1, 0, 1], [0.9, 0.1, 0.8], [1, 0, 1])
        assert s.accuracy == 1.0
        assert s.auc == 1.0
        assert s.mcc == 1.0
        assert s.fpr == 0.0 and s.fnr == 0.0

    def test_constant_predictor_on_balanced(self):
        preds = [1] * 10
        probs = [0.7] * 10
        labels = [0, 1] * 5
        s = scores_from_predictions(preds, probs, labels)
        assert s.accuracy == 0.5
        assert s.mcc == 0.0
        assert s.auc == 0.5

    def test_metrics_recomputable_from_confusion(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            n = int(rng.integers(4, 40))
            labels = rng.integers(0, 2, size=n).tolist()
            preds = rng.integers(0, 2, size=n).tolist()
            probs = rng.random(n).tolist()
            s = scores_from_predictions(preds, probs, labels)
            tp, tn, fp, fn = s.confusion
            assert s.accuracy == (tp + tn) / n
            assert s.fpr == (fp / (fp + tn) if fp + tn else 0.0)
            assert s.fnr == (fn / (fn + tp) if fn + tp else 0.0)
            assert s.mcc == mcc(s.confusion)

    def test_single_class_auc_is_none(self):
        s = scores_from_predictions([1, 1], [0.6, 0.7], [1, 1])
        assert s.auc is None

    def test_json_serialization(self):
        s = scores_from_predictions([1, 0], [0.8, 0.1], [1, 0])
        entry = s.to_json()
        assert entry["confusion"] == {"tp": 1, "tn": 1, "fp": 0, "fn": 0}
        assert entry["accuracy"] == 1.0
