"""Discriminatory-expression feature selection for interpretable short-text classification."""

__version__ = "0.1.0"

from .corpus import Corpus, Document, FoldPlan, StopWordSet, load_csv, load_sls, load_stopwords, make_folds
from .expressions import Expression, MiningConfig, matches, mine, select_top, vectorize
from .features import Feature, FeatureSet, Method
from .filters import ContingencyTable, filter_score, select_k
from .ranking import TermStats, cficf

__all__ = [
    "ContingencyTable",
    "Corpus",
    "Document",
    "Expression",
    "Feature",
    "FeatureSet",
    "FoldPlan",
    "Method",
    "MiningConfig",
    "StopWordSet",
    "TermStats",
    "cficf",
    "filter_score",
    "load_csv",
    "load_sls",
    "load_stopwords",
    "make_folds",
    "matches",
    "mine",
    "select_k",
    "select_top",
    "vectorize",
]
