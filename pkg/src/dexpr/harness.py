"""Cross-validated experiments: feature selection x classifier x fold grids."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .corpus import Corpus, make_folds
from .evaluation import (
    comprehensibility_rate,
    confusion,
    dispersion,
    dt_complexity,
    knn_comprehensibility,
    metrics,
    rf_complexity,
    roc_auc,
)
from .expressions import ExpressionIndex, mine, select_top, vectorize
from .features import FeatureSet, Method
from .filters import select_k
from .models import ModelError, train_forest, train_knn, train_logreg, train_tree, tree_stats
from .ranking import TermStats

__all__ = ["EvalReport", "RunManifest", "ROW_FIELDS", "fit_features", "run", "write_outputs"]

log = logging.getLogger(__name__)

ROW_FIELDS = (
    "dataset",
    "fold",
    "method",
    "classifier",
    "neighbours",
    "k_features",
    "n_features",
    "n_train",
    "n_test",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "roc_auc",
    "trees",
    "rules",
    "mean_clauses",
    "complexity",
    "comprehensibility_rate",
)
METRICS = ("accuracy", "precision", "recall", "f1", "roc_auc")
GROUP_KEY = ("dataset", "method", "classifier", "neighbours", "k_features")


@dataclass
class EvalReport:
    rows: list[dict[str, Any]]
    aggregates: list[dict[str, Any]] = field(default_factory=list)
    by_method: list[dict[str, Any]] = field(default_factory=list)
    knn_comprehensibility: list[dict[str, Any]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=ROW_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _fmt(row.get(k)) for k in ROW_FIELDS})
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "aggregates": _clean(self.aggregates),
            "by_method": _clean(self.by_method),
            "knn_comprehensibility": _clean(self.knn_comprehensibility),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def curves_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["method", "classifier", "neighbours", "k_features", "f1_mean", "f1_std"])
        for agg in self.aggregates:
            writer.writerow(
                [agg["method"], agg["classifier"], _fmt(agg["neighbours"]), agg["k_features"],
                 _fmt(agg["f1"]["mean"]), _fmt(agg["f1"]["std"])]
            )
        return buf.getvalue()

    def select(self, **where) -> list[dict[str, Any]]:
        return [r for r in self.rows if all(r.get(k) == v for k, v in where.items())]


@dataclass
class RunManifest:
    config_hash: str
    code_version: str
    started: str
    finished: str
    dataset: dict[str, Any]
    folds: list[dict[str, Any]]
    warnings: list[str]
    config: dict[str, Any]

    def to_json(self) -> str:
        return json.dumps(_clean(self.__dict__), indent=2, sort_keys=True, default=str)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(round(v, 10))
    return str(v)


def _clean(obj):
    if isinstance(obj, float):
        return None if math.isnan(obj) else (str(obj) if math.isinf(obj) else obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def fit_features(
    config: ExperimentConfig,
    method: Method,
    train: Corpus,
    k: int,
    stats: TermStats | None = None,
    index: ExpressionIndex | None = None,
) -> FeatureSet:
    """Select ``k`` features with ``method`` from the training corpus only."""
    stats = stats or TermStats.from_corpus(train)
    if method is Method.DE:
        exprs = mine(train, config.mining_config(), stats=stats, index=index)
        return select_top(exprs, k)
    stop = config.stopwords() if config.filter_stopwords else None
    return select_k(stats, method, k, stopwords=stop, chi2_denominator=config.chi2_denominator)


def _evaluate(model, X_test, y_test, **predict_kw) -> dict[str, float]:
    proba = np.asarray(model.predict_proba(X_test, **predict_kw), dtype=float)
    pred = proba >= 0.5 if not hasattr(model, "trees") else model.predict(X_test)
    out = metrics(confusion(y_test, pred))
    try:
        out["roc_auc"] = roc_auc(proba, y_test)
    except ValueError:
        out["roc_auc"] = math.nan
    return out


def _classifier_rows(config, X_train, y_train, X_test, y_test, seed) -> list[dict[str, Any]]:
    mc = config.models
    rows = []
    for clf in config.classifiers:
        if clf == "dt":
            model = train_tree(X_train, y_train, max_depth=mc.tree_max_depth)
            st = tree_stats(model)
            row = {"classifier": "dt", **_evaluate(model, X_test, y_test), "trees": 1, **st}
            row["complexity"] = dt_complexity(st["rules"], st["mean_clauses"])
            rows.append(row)
        elif clf == "rf":
            model = train_forest(
                X_train, y_train, mc.forest_trees, mc.forest_max_features, seed=seed, max_depth=mc.tree_max_depth
            )
            st = model.stats()
            row = {"classifier": "rf", **_evaluate(model, X_test, y_test), **st}
            row["complexity"] = rf_complexity(st["trees"], st["rules"], st["mean_clauses"])
            rows.append(row)
        elif clf == "logreg":
            model = train_logreg(X_train, y_train, mc.logreg_lr, mc.logreg_iters, mc.logreg_l2)
            rows.append({"classifier": "logreg", **_evaluate(model, X_test, y_test)})
        elif clf == "knn":
            model = None
            for k in mc.knn_k:
                if k > len(y_train):
                    continue
                model = model or train_knn(X_train, y_train, min(mc.knn_k))
                rows.append({"classifier": "knn", "neighbours": k, **_evaluate(model, X_test, y_test, k=k)})
    for row in rows:
        cx = row.get("complexity")
        if cx is not None:
            row["comprehensibility_rate"] = comprehensibility_rate(row["f1"], cx) if cx > 0 else math.nan
    return rows


def _aggregate(rows: list[dict[str, Any]]) -> list[dict[str, Any]]:
    groups: dict[tuple, list[dict]] = defaultdict(list)
    for row in rows:
        groups[tuple(row.get(k) for k in GROUP_KEY)].append(row)
    out = []
    for key in sorted(groups, key=lambda t: tuple("" if v is None else str(v).zfill(6) for v in t)):
        members = groups[key]
        agg: dict[str, Any] = dict(zip(GROUP_KEY, key))
        agg["folds"] = len(members)
        for m in METRICS + ("rules", "mean_clauses", "complexity", "comprehensibility_rate"):
            vals = [r[m] for r in members if r.get(m) is not None and not math.isnan(r[m])]
            if not vals:
                continue
            stat = {"mean": float(np.mean(vals))}
            if len(vals) >= 2:
                stat.update(dispersion(vals))
            else:
                stat.update({"range": 0.0, "iqr": 0.0, "std": math.nan, "cv": math.nan})
            agg[m] = stat
        out.append(agg)
    return out


def _by_method(aggregates: list[dict[str, Any]]) -> list[dict[str, Any]]:
    # fold means first, then the mean across classifier cells
    cells: dict[tuple, list[dict]] = defaultdict(list)
    for agg in aggregates:
        cells[(agg["dataset"], agg["method"], agg["k_features"])].append(agg)
    out = []
    for (dataset, method, k), members in sorted(cells.items()):
        entry = {"dataset": dataset, "method": method, "k_features": k, "cells": len(members)}
        for m in METRICS:
            vals = [a[m]["mean"] for a in members if m in a]
            if vals:
                entry[m] = float(np.mean(vals))
        out.append(entry)
    return out


def _knn_rates(aggregates: list[dict[str, Any]]) -> list[dict[str, Any]]:
    cells: dict[tuple, dict[int, float]] = defaultdict(dict)
    for agg in aggregates:
        if agg["classifier"] == "knn" and "f1" in agg:
            cells[(agg["dataset"], agg["method"], agg["k_features"])][agg["neighbours"]] = agg["f1"]["mean"]
    return [
        {"dataset": d, "method": m, "k_features": k, "f1_by_k": {str(n): f for n, f in sorted(f1s.items())},
         "rate": knn_comprehensibility(f1s)}
        for (d, m, k), f1s in sorted(cells.items())
    ]


def run(
    config: ExperimentConfig,
    corpus: Corpus | None = None,
    seed: int | None = None,
) -> tuple[EvalReport, RunManifest]:
    """Run the full grid and return the per-fold report and the manifest.

    Feature selection (CF-ICF statistics, mined expressions, filter scores)
    is refit on each training split; test documents never reach it.
    """
    if seed is not None:
        config = replace(config, cv=replace(config.cv, seed=seed))
    started = datetime.now(timezone.utc).isoformat()
    corpus = corpus if corpus is not None else config.load_corpus()
    warnings: list[str] = []
    if corpus.dropped:
        warnings.append(f"dropped {corpus.dropped} empty document(s) after preprocessing")
    cv = config.cv
    plan = make_folds(corpus.n, cv.folds, cv.seed, cv.mode, corpus.labels if cv.stratified else None)
    dataset = Path(config.dataset.path).stem
    kmax = max(config.k_features)
    rows: list[dict[str, Any]] = []
    fold_log: list[dict[str, Any]] = []

    for i in range(plan.k):
        train_ids, test_ids = plan.split(i)
        train, test = corpus.subset(train_ids), corpus.subset(test_ids)
        if train.positive_count == 0 or train.negative_count == 0:
            msg = f"fold {i}: single-class training split, skipped"
            log.warning(msg)
            warnings.append(msg)
            continue
        stats = TermStats.from_corpus(train)
        index = ExpressionIndex.from_corpus(train)
        y_train, y_test = train.labels, test.labels
        entry: dict[str, Any] = {"fold": i, "n_train": train.n, "n_test": test.n, "features": {}}
        for method in config.fs_methods:
            fs = fit_features(config, method, train, kmax, stats, index)
            entry["features"][method.value] = fs.names
            for w in fs.warnings:
                warnings.append(f"fold {i}: {w}")
            X_train_all = vectorize(train, fs)
            X_test_all = vectorize(test, fs)
            for k in config.k_features:
                cols = min(k, len(fs))
                X_train, X_test = X_train_all[:, :cols], X_test_all[:, :cols]
                try:
                    cell = _classifier_rows(config, X_train, y_train, X_test, y_test, seed=cv.seed * 1000 + i)
                except ModelError as err:
                    warnings.append(f"fold {i} {method.value} k={k}: {err}")
                    continue
                for row in cell:
                    row.update(
                        dataset=dataset, fold=i, method=method.value, k_features=k,
                        n_features=cols, n_train=train.n, n_test=test.n,
                    )
                    row.setdefault("neighbours", None)
                    rows.append(row)
        fold_log.append(entry)

    rows.sort(key=lambda r: (r["dataset"], r["fold"], r["method"], r["classifier"], r["neighbours"] or 0, r["k_features"]))
    aggregates = _aggregate(rows)
    report = EvalReport(rows, aggregates, _by_method(aggregates), _knn_rates(aggregates))
    manifest = RunManifest(
        config_hash=config.hash(),
        code_version=__version__,
        started=started,
        finished=datetime.now(timezone.utc).isoformat(),
        dataset={"name": dataset, "n": corpus.n, "positive_count": corpus.positive_count, "dropped": corpus.dropped},
        folds=fold_log,
        warnings=warnings,
        config=config.to_dict(),
    )
    return report, manifest


def write_outputs(report: EvalReport, manifest: RunManifest, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    (out / "curves").mkdir(parents=True, exist_ok=True)
    paths = {
        "report.csv": out / "report.csv",
        "report.json": out / "report.json",
        "manifest.json": out / "manifest.json",
        "curves": out / "curves" / "f1_vs_features.csv",
    }
    paths["report.csv"].write_text(report.to_csv(), encoding="utf-8")
    paths["report.json"].write_text(report.to_json(), encoding="utf-8")
    paths["manifest.json"].write_text(manifest.to_json(), encoding="utf-8")
    paths["curves"].write_text(report.curves_csv(), encoding="utf-8")
    return paths
