"""Acceptance criteria, one test and one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines appear in
the "acceptance criteria" section at the end. Criteria that cannot be met
fail loudly with the reason in the line rather than being loosened.

Criteria 5 and 6 need the Sentiment Labelled Sentences files (amazon, imdb
and yelp ``*_labelled.txt``). Point ``DEXPR_SLS_DIR`` at their directory or
place them in ``data/sls`` under the repository root.
"""

import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE, FIXTURES
from dexpr.config import parse_config
from dexpr.corpus import StopWordSet, load_sls
from dexpr.evaluation import comprehensibility_rate, dt_complexity, knn_comprehensibility, rf_complexity, roc_auc
from dexpr.expressions import MiningConfig, mine
from dexpr.filters import ContingencyTable, filter_score
from dexpr.harness import run
from dexpr.models import logistic_loss_and_grad
from dexpr.ranking import TermStats, cficf, tfidf

REPO = Path(__file__).resolve().parents[1]


def verdict(name, ok, detail):
    ACCEPTANCE.append((name, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, f"{name}: {detail}"


def sls_dir():
    for cand in (os.environ.get("DEXPR_SLS_DIR"), REPO / "data" / "sls"):
        if cand and Path(cand).is_dir() and any(Path(cand).glob("*_labelled.txt")):
            return Path(cand)
    return None


def random_corpus(rng, max_docs=10, vocab=8):
    while True:
        n = int(rng.integers(2, max_docs + 1))
        v = [chr(ord("a") + i) for i in range(int(rng.integers(1, vocab + 1)))]
        docs = [list(rng.choice(v, size=int(rng.integers(1, 7)))) for _ in range(n)]
        labels = (rng.random(n) < 0.5).tolist()
        if any(labels) and not all(labels):
            return docs, labels


def test_criterion_1_cficf_identity():
    # cficf(t) against the summed tf-idf over {concatenated positives} + negatives
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    pairs = bad = 0
    worst = 0.0
    for _ in range(200):
        docs, labels = random_corpus(rng)
        stats = TermStats.from_tokens(docs, labels)
        d_l = [t for d, y in zip(docs, labels) if y for t in d]
        virtual = [d_l] + [d for d, y in zip(docs, labels) if not y]
        vstats = TermStats.from_tokens(virtual, [True] + [False] * (len(virtual) - 1))
        for term in stats.vocabulary:
            lhs = cficf(term, stats)
            rhs = sum(tfidf(term, i, vstats) for i in range(len(virtual)))
            pairs += 1
            if abs(lhs - rhs) > 1e-9:
                bad += 1
                worst = max(worst, abs(lhs - rhs))
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 5
    verdict(
        "1 CF-ICF identity",
        ok,
        f"{pairs - bad}/{pairs} term checks within 1e-9 (max gap {worst:.4f}), {elapsed:.2f}s; "
        "the identity cannot hold in general: negatives containing t add tf-idf mass while "
        "cficf of a term absent from the positives is 0, and the virtual corpus has fewer documents than n",
    )


FILTER_ORACLES = {
    "IG": oracles.ig,
    "MI": oracles.mi,
    "OR": oracles.odds_ratio,
    "ECE": oracles.ece,
    "GSS": oracles.gss,
}


def test_criterion_2_filter_oracle():
    rng = np.random.default_rng(2)
    tables = []
    while len(tables) < 1000:
        cells = tuple(int(v) for v in rng.integers(0, 40, size=4))
        if cells[0] + cells[2] and cells[1] + cells[3]:
            tables.append(cells)
    start = time.perf_counter()
    failures = []
    for cells in tables:
        t = ContingencyTable(*cells)
        for name, fn in FILTER_ORACLES.items():
            if not math.isclose(filter_score(name, t), fn(*cells), rel_tol=1e-9, abs_tol=1e-9):
                failures.append((name, cells))
        pos = [1] * cells[0] + [0] * cells[2]
        neg = [1] * cells[1] + [0] * cells[3]
        want, got = oracles.anova_from_groups(pos, neg), filter_score("ANOVA", t)
        if not (math.isinf(want) and math.isinf(got)) and not math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-9):
            failures.append(("ANOVA", cells))
        for mode in ("product", "literal"):
            try:
                want = oracles.chi2(*cells, literal=mode == "literal")
            except ZeroDivisionError:
                want = None
            try:
                got = filter_score("CHI2", t, chi2_denominator=mode)
            except ZeroDivisionError:
                got = None
            if (want is None) != (got is None) or (
                want is not None and not math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-9)
            ):
                failures.append((f"CHI2/{mode}", cells))
    elapsed = time.perf_counter() - start
    verdict(
        "2 filter-formula oracle",
        not failures and elapsed < 5,
        f"{len(failures)} mismatches over 1000 tables x 8 scores (CHI2 in both modes), {elapsed:.2f}s",
    )


def test_criterion_3_de_soundness_and_subset():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    instances = mined = 0
    problems = []
    for _ in range(300):
        n = int(rng.integers(2, 7))
        vocab = list("abcde")[: int(rng.integers(2, 6))]
        docs = [list(rng.choice(vocab, size=int(rng.integers(1, 6)))) for _ in range(n)]
        labels = (rng.random(n) < 0.5).tolist()
        if all(labels) or not any(labels):
            labels[0] = not labels[0]
        stop = frozenset(rng.choice(vocab, size=int(rng.integers(0, 2)), replace=False).tolist())
        for r in (0.2, 0.5, 1.0):
            for p in (0.5, 0.8, 1.0):
                instances += 1
                d = mine(docs, MiningConfig(r=r, p=p, alpha=2, stopwords=StopWordSet(stop)), labels=labels)
                universe = oracles.discriminatory_set(docs, labels, r, p, 2, stop)
                for e in d:
                    mined += 1
                    rec, prec = oracles.recall_precision(e.tokens, docs, labels)
                    sound = (
                        rec >= r
                        and prec >= p
                        and len(e.tokens) <= 2
                        and not all(t in stop for t in e.tokens)
                        and oracles.is_subsequence(e.tokens, docs[e.source_doc])
                    )
                    if not sound or e.tokens not in universe:
                        problems.append((docs, labels, r, p, e.tokens))
    elapsed = time.perf_counter() - start
    verdict(
        "3 DE soundness and subset",
        not problems and elapsed < 30,
        f"{mined} mined expressions over {instances} (instance, r, p) cases, {len(problems)} violations, {elapsed:.2f}s",
    )


def test_criterion_4_comprehensibility_fixtures():
    tol = 0.005
    checks = [
        ("DT gender/DE complexity", dt_complexity(28, 6.5), 4.7320),
        ("DT gender/DE rate", comprehensibility_rate(0.6444, 4.7320), 13.6171),
        ("DT airlines/CHI2 complexity", dt_complexity(34, 7.4706), 7.5901),
        ("DT airlines/CHI2 rate", comprehensibility_rate(0.5981, 7.5901), 7.8796),
        ("RF DE complexity", rf_complexity(5, 41.9, 7.4953), 9.41),
        ("RF DE rate", comprehensibility_rate(0.5707, 9.41), 6.06),
        ("RF CHI2 complexity", rf_complexity(5, 105.3, 9.2564), 36.08),
        ("RF CHI2 rate", comprehensibility_rate(0.6039, 36.08), 1.67),
        ("kNN imdb/DE rate", knn_comprehensibility({k: 0.6966 for k in (5, 7, 9, 10, 25)}), 0.4138),
    ]
    misses = [(name, got, want) for name, got, want in checks if abs(got - want) > tol]
    detail = f"{len(checks) - len(misses)}/{len(checks)} within +-{tol}"
    if misses:
        detail += "; off: " + ", ".join(f"{n} {g:.4f} vs reference {w}" for n, g, w in misses)
        detail += " (two-decimal reference values are truncated, not rounded)"
    verdict("4 comprehensibility fixtures", not misses, detail)


def _sls_config(folds, mode, fs_methods, path):
    return parse_config(
        {
            "dataset": {"path": str(path), "format": "sls"},
            "experiment": {"fs_methods": fs_methods, "classifiers": ["dt"], "k_features": [9]},
            "cv": {"folds": folds, "mode": mode, "seed": 0},
            "mining": {"r": 0.05, "p": 0.8, "alpha": 3},
        },
        FIXTURES,
    )


def test_criterion_5_sls_imdb_end_to_end():
    root = sls_dir()
    if root is None or not (root / "imdb_labelled.txt").is_file():
        verdict(
            "5 SLS imdb end-to-end",
            False,
            "imdb_labelled.txt not found (set DEXPR_SLS_DIR); the dataset could not be downloaded here",
        )
    path = root / "imdb_labelled.txt"
    cfg = _sls_config(5, "standard", ["DE", "CHI2", "GSS"], path)
    start = time.perf_counter()
    report, _ = run(cfg, corpus=load_sls(path))
    elapsed = time.perf_counter() - start
    agg = {a["method"]: a for a in report.aggregates}
    de = agg["DE"]
    de_rows = report.select(method="DE", classifier="dt")
    leaves = max(r["rules"] for r in de_rows)
    depth = max(r["mean_clauses"] for r in de_rows)
    worst_std = max(agg["CHI2"]["f1"]["std"], agg["GSS"]["f1"]["std"])
    ok = (
        0.48 <= de["f1"]["mean"] <= 0.80
        and de["f1"]["std"] <= worst_std + 0.05
        and leaves <= 40
        and depth <= 9
        and elapsed < 300
    )
    verdict(
        "5 SLS imdb end-to-end",
        ok,
        f"DE f1 {de['f1']['mean']:.4f} std {de['f1']['std']:.4f} (CHI2/GSS worst std {worst_std:.4f}), "
        f"max leaves {leaves}, max mean path {depth:.2f}, {elapsed:.1f}s",
    )


def test_criterion_6_reversed_protocol():
    root = sls_dir()
    if root is None:
        verdict(
            "6 reversed 20-fold protocol on SLS",
            False,
            "SLS files not found (set DEXPR_SLS_DIR); the same protocol on a synthetic 3000-document "
            "corpus is exercised in test_harness",
        )
    corpus = load_sls(root)
    cfg = _sls_config(20, "reversed", ["DE"], root)
    report, _ = run(cfg, corpus=corpus)
    rows = report.select(method="DE", classifier="dt")
    sizes = sorted({r["n_train"] for r in rows})
    expected = corpus.n / 20
    std = next(a for a in report.aggregates if a["method"] == "DE")["f1"]["std"]
    ok = len(rows) == 20 and all(abs(s - expected) <= 1 for s in sizes) and abs(expected - 150) <= 1 and math.isfinite(std)
    verdict(
        "6 reversed 20-fold protocol on SLS",
        ok,
        f"{len(rows)} fold rows, training sizes {sizes} of n={corpus.n}, DE f1 std across folds {std:.4f}",
    )


def test_criterion_7_numerical_checks():
    rng = np.random.default_rng(7)
    worst = 0.0
    h = 1e-6
    for _ in range(20):
        n, m = int(rng.integers(3, 15)), int(rng.integers(1, 6))
        X = rng.integers(0, 2, size=(n, m)).astype(float)
        y = (rng.random(n) < 0.5).astype(float)
        w, b = rng.normal(size=m), float(rng.normal())
        l2 = float(rng.choice([0.0, 0.1, 1.0]))
        _, gw, gb = logistic_loss_and_grad(w, b, X, y, l2)
        analytic = np.append(gw, gb)
        numeric = []
        for j in range(m + 1):
            e = np.zeros(m + 1)
            e[j] = h
            f_plus = logistic_loss_and_grad(w + e[:m], b + e[m], X, y, l2)[0]
            f_minus = logistic_loss_and_grad(w - e[:m], b - e[m], X, y, l2)[0]
            numeric.append((f_plus - f_minus) / (2 * h))
        numeric = np.array(numeric)
        rel = np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))
        worst = max(worst, float(rel.max()))
    auc_breaks = 0
    for _ in range(100):
        s = rng.random(25)
        y = rng.random(25) < 0.5
        y[:2] = [True, False]
        base = roc_auc(s, y)
        for g in (lambda v: 3 * v - 1, np.exp, lambda v: v**3, lambda v: np.log1p(v) + 10):
            if roc_auc(g(s), y) != base:
                auc_breaks += 1
    verdict(
        "7 numerical checks",
        worst <= 1e-5 and auc_breaks == 0,
        f"max gradient relative error {worst:.2e} over 20 instances; "
        f"{auc_breaks} AUC changes under 400 monotone transforms",
    )


@pytest.mark.skipif(sls_dir() is None, reason="needs SLS data")
def test_sls_loader_counts():
    corpus = load_sls(sls_dir())
    assert corpus.n >= 2700 and corpus.positive_count > 0
