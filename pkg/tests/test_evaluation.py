import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dexpr.evaluation import (
    KNN_K_VALUES,
    Confusion,
    comprehensibility_rate,
    confusion,
    dispersion,
    dt_complexity,
    knn_comprehensibility,
    metrics,
    rf_complexity,
    roc_auc,
)


def brute_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


class TestMetrics:
    def test_perfect(self):
        m = metrics(confusion([1, 1, 0, 0], [1, 1, 0, 0]))
        assert m == {"accuracy": 1.0, "precision": 1.0, "recall": 1.0, "f1": 1.0}

    def test_no_positive_predictions(self):
        m = metrics(confusion([1, 0, 0], [0, 0, 0]))
        assert m["precision"] == 0.0 and m["f1"] == 0.0
        assert m["accuracy"] == pytest.approx(2 / 3)

    def test_counts(self):
        assert confusion([1, 1, 0, 0, 1], [1, 0, 1, 0, 1]) == Confusion(tp=2, fp=1, tn=1, fn=1)

    def test_empty(self):
        with pytest.raises(ValueError):
            metrics(Confusion(0, 0, 0, 0))

    @settings(max_examples=200)
    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=40))
    def test_f1_is_harmonic_mean(self, pairs):
        t, p = zip(*pairs)
        m = metrics(confusion(t, p))
        for v in m.values():
            assert 0.0 <= v <= 1.0
        if m["precision"] + m["recall"]:
            assert m["f1"] == pytest.approx(2 / (1 / m["precision"] + 1 / m["recall"]) if m["precision"] and m["recall"] else 0.0)


class TestAuc:
    def test_perfect_ranking(self):
        assert roc_auc([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]) == 1.0

    def test_all_ties(self):
        assert roc_auc([0.5] * 4, [1, 0, 1, 0]) == 0.5

    def test_single_class(self):
        with pytest.raises(ValueError):
            roc_auc([0.1, 0.2], [1, 1])

    @settings(max_examples=200)
    @given(st.lists(st.tuples(st.integers(0, 5), st.booleans()), min_size=2, max_size=30))
    def test_matches_pair_counting(self, pairs):
        s, y = zip(*pairs)
        if all(y) or not any(y):
            return
        assert roc_auc(s, y) == pytest.approx(brute_auc(s, y), abs=1e-12)

    def test_monotone_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            s = rng.random(30)
            y = rng.random(30) < 0.5
            y[:2] = [True, False]
            assert roc_auc(s, y) == roc_auc(np.exp(3 * s) + 7, y)


class TestDispersion:
    def test_known_values(self):
        d = dispersion([0.5, 0.6, 0.7])
        assert d["range"] == pytest.approx(0.2)
        assert d["iqr"] == pytest.approx(0.1)
        assert d["std"] == pytest.approx(0.1)
        assert d["cv"] == pytest.approx(100 * 0.1 / 0.6)

    def test_constant(self):
        d = dispersion([0.4, 0.4, 0.4])
        assert d["range"] == d["iqr"] == d["std"] == d["cv"] == 0.0

    def test_zero_mean_cv(self):
        assert math.isnan(dispersion([0.0, 0.0])["cv"])

    def test_needs_two(self):
        with pytest.raises(ValueError):
            dispersion([1.0])

    @settings(max_examples=200)
    @given(st.lists(st.floats(0, 1), min_size=2, max_size=20))
    def test_ordering(self, v):
        d = dispersion(v)
        assert 0 <= d["iqr"] <= d["range"] + 1e-12
        assert d["std"] >= 0


class TestComplexity:
    def test_dt_gender_de(self):
        assert dt_complexity(28, 6.5) == pytest.approx(4.7320)

    def test_dt_airlines_chi2(self):
        assert dt_complexity(34, 7.4706) == pytest.approx(7.5901, abs=5e-5)

    def test_dt_baseline_is_one(self):
        assert dt_complexity(10, 5) == 1.0

    def test_rf_baseline_is_one(self):
        assert rf_complexity(5, 10, 5) == 1.0

    def test_rf_reference_rows_truncate(self):
        # the reference values are truncated, not rounded, to two decimals
        de = rf_complexity(5, 41.9, 7.4953)
        chi = rf_complexity(5, 105.3, 9.2564)
        assert de == pytest.approx(9.4157, abs=5e-5) and math.floor(de * 100) / 100 == 9.41
        assert chi == pytest.approx(36.0888, abs=5e-5) and math.floor(chi * 100) / 100 == 36.08

    def test_rates(self):
        assert comprehensibility_rate(0.6444, 4.7320) == pytest.approx(13.6171, abs=1e-3)
        assert comprehensibility_rate(0.5707, 9.41) == pytest.approx(6.06, abs=5e-3)
        assert comprehensibility_rate(0.6039, 36.08) == pytest.approx(1.67, abs=5e-3)

    def test_zero_complexity(self):
        with pytest.raises(ZeroDivisionError):
            comprehensibility_rate(0.5, 0.0)

    def test_knn_rate(self):
        assert knn_comprehensibility({k: 0.6966 for k in KNN_K_VALUES}) == pytest.approx(0.4138, abs=5e-5)

    def test_knn_bad_k(self):
        with pytest.raises(ValueError):
            knn_comprehensibility({0: 0.5})
