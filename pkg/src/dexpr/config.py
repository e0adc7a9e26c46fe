"""Experiment configuration files (TOML)."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .corpus import Corpus, StopWordSet, load_csv, load_sls, load_stopwords
from .expressions import MiningConfig
from .features import Method

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config"]

CLASSIFIERS = ("knn", "dt", "rf", "logreg")
OUTPUT_ENV = "DEXPR_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetConfig:
    path: str
    format: str = "csv"
    text_column: str = "text"
    label_column: str = "label"
    positive_class: str | None = None
    language: str = "english"
    delimiter: str = ","
    stopwords_file: str | None = None
    extra_stopwords: tuple[str, ...] = ()

    @property
    def name(self) -> str:
        return Path(self.path).stem


@dataclass(frozen=True)
class CVConfig:
    folds: int = 5
    mode: str = "standard"
    seed: int = 0
    stratified: bool = False


@dataclass(frozen=True)
class MiningSection:
    r: float
    p: float
    alpha: int
    max_queue: int = 10_000
    documents: str = "positive"


@dataclass(frozen=True)
class ModelsConfig:
    tree_max_depth: int | None = None
    forest_trees: int = 5
    forest_max_features: str | int | None = "sqrt"
    knn_k: tuple[int, ...] = (5,)
    logreg_lr: float = 0.1
    logreg_iters: int = 1000
    logreg_l2: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig
    fs_methods: tuple[Method, ...]
    classifiers: tuple[str, ...]
    k_features: tuple[int, ...] = (9,)
    cv: CVConfig = field(default_factory=CVConfig)
    mining: MiningSection | None = None
    models: ModelsConfig = field(default_factory=ModelsConfig)
    output_dir: str = "results"
    chi2_denominator: str = "product"
    filter_stopwords: bool = True

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["fs_methods"] = [m.value for m in self.fs_methods]
        return d

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def stopwords(self) -> StopWordSet:
        ds = self.dataset
        return load_stopwords(ds.language, ds.stopwords_file, ds.extra_stopwords)

    def mining_config(self) -> MiningConfig:
        if self.mining is None:
            raise ConfigError("[mining] r, p and alpha must be given explicitly")
        m = self.mining
        return MiningConfig(m.r, m.p, m.alpha, self.stopwords(), m.max_queue, m.documents)

    def load_corpus(self) -> Corpus:
        ds = self.dataset
        if ds.format == "sls":
            return load_sls(ds.path, ds.language)
        return load_csv(ds.path, ds.text_column, ds.label_column, ds.positive_class, ds.language, ds.delimiter)


def _take(section: dict, key: str, typ, default=..., where: str = ""):
    if key not in section:
        if default is ...:
            raise ConfigError(f"missing required key {where}{key}")
        return default
    val = section[key]
    if typ is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, typ):
        raise ConfigError(f"{where}{key} must be {getattr(typ, '__name__', typ)}, got {val!r}")
    return val


def parse_config(raw: dict, base_dir: str | Path = ".") -> ExperimentConfig:
    """Validate a config mapping; relative paths resolve against ``base_dir``."""
    base_dir = Path(base_dir)
    known = {"dataset", "experiment", "cv", "mining", "models"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    ds = raw.get("dataset")
    if not isinstance(ds, dict):
        raise ConfigError("missing [dataset] section")
    path = Path(_take(ds, "path", str, where="dataset."))
    if not path.is_absolute():
        path = base_dir / path
    fmt = _take(ds, "format", str, "csv", "dataset.")
    if fmt not in ("csv", "sls"):
        raise ConfigError(f"dataset.format must be 'csv' or 'sls', got {fmt!r}")
    positive = ds.get("positive_class")
    if fmt == "csv" and positive is None:
        raise ConfigError("dataset.positive_class is required for csv datasets")
    sw_file = ds.get("stopwords_file")
    if sw_file is not None and not Path(sw_file).is_absolute():
        sw_file = str(base_dir / sw_file)
    dataset = DatasetConfig(
        path=str(path),
        format=fmt,
        text_column=_take(ds, "text_column", str, "text", "dataset."),
        label_column=_take(ds, "label_column", str, "label", "dataset."),
        positive_class=None if positive is None else str(positive),
        language=_take(ds, "language", str, "english", "dataset."),
        delimiter=_take(ds, "delimiter", str, ",", "dataset."),
        stopwords_file=sw_file,
        extra_stopwords=tuple(_take(ds, "extra_stopwords", list, [], "dataset.")),
    )

    ex = raw.get("experiment", {})
    try:
        methods = tuple(Method.parse(m) for m in _take(ex, "fs_methods", list, where="experiment."))
    except ValueError as err:
        raise ConfigError(str(err)) from None
    if not methods:
        raise ConfigError("experiment.fs_methods must not be empty")
    classifiers = tuple(str(c).lower() for c in _take(ex, "classifiers", list, where="experiment."))
    if not classifiers:
        raise ConfigError("experiment.classifiers must not be empty")
    bad = [c for c in classifiers if c not in CLASSIFIERS]
    if bad:
        raise ConfigError(f"unknown classifiers {bad}; expected a subset of {CLASSIFIERS}")
    k_features = tuple(_take(ex, "k_features", list, [9], "experiment."))
    if not k_features or any(not isinstance(k, int) or k < 1 for k in k_features):
        raise ConfigError("experiment.k_features must be a non-empty list of integers >= 1")
    chi2_den = _take(ex, "chi2_denominator", str, "product", "experiment.")
    if chi2_den not in ("product", "literal"):
        raise ConfigError("experiment.chi2_denominator must be 'product' or 'literal'")
    # relative output paths are taken from the working directory, not the config's
    output_dir = ex.get("output_dir") or os.environ.get(OUTPUT_ENV) or "results"

    cvs = raw.get("cv", {})
    cv = CVConfig(
        folds=_take(cvs, "folds", int, 5, "cv."),
        mode=_take(cvs, "mode", str, "standard", "cv."),
        seed=_take(cvs, "seed", int, 0, "cv."),
        stratified=_take(cvs, "stratified", bool, False, "cv."),
    )
    if cv.mode not in ("standard", "reversed"):
        raise ConfigError("cv.mode must be 'standard' or 'reversed'")
    if cv.folds < 2:
        raise ConfigError("cv.folds must be >= 2")

    mining = None
    if "mining" in raw:
        ms = raw["mining"]
        mining = MiningSection(
            r=_take(ms, "r", float, where="mining."),
            p=_take(ms, "p", float, where="mining."),
            alpha=_take(ms, "alpha", int, where="mining."),
            max_queue=_take(ms, "max_queue", int, 10_000, "mining."),
            documents=_take(ms, "documents", str, "positive", "mining."),
        )
        try:
            MiningConfig(mining.r, mining.p, mining.alpha, max_queue=mining.max_queue, documents=mining.documents)
        except ValueError as err:
            raise ConfigError(f"[mining] {err}") from None
    if Method.DE in methods and mining is None:
        raise ConfigError("DE needs an explicit [mining] section with r, p and alpha")

    mo = raw.get("models", {})
    knn_k = mo.get("knn_k", [5])
    if isinstance(knn_k, int):
        knn_k = [knn_k]
    if not knn_k or any(not isinstance(k, int) or k < 1 for k in knn_k):
        raise ConfigError("models.knn_k must be a positive integer or a list of them")
    depth = mo.get("tree_max_depth")
    if depth is not None and (not isinstance(depth, int) or depth < 1):
        raise ConfigError("models.tree_max_depth must be a positive integer")
    models = ModelsConfig(
        tree_max_depth=depth,
        forest_trees=_take(mo, "forest_trees", int, 5, "models."),
        forest_max_features=mo.get("forest_max_features", "sqrt"),
        knn_k=tuple(knn_k),
        logreg_lr=_take(mo, "logreg_lr", float, 0.1, "models."),
        logreg_iters=_take(mo, "logreg_iters", int, 1000, "models."),
        logreg_l2=_take(mo, "logreg_l2", float, 0.0, "models."),
    )

    return ExperimentConfig(
        dataset=dataset,
        fs_methods=methods,
        classifiers=classifiers,
        k_features=k_features,
        cv=cv,
        mining=mining,
        models=models,
        output_dir=output_dir,
        chi2_denominator=chi2_den,
        filter_stopwords=_take(ex, "filter_stopwords", bool, True, "experiment."),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path}: {err}") from None
    return parse_config(raw, path.parent)
