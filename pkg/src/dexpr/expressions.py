"""Mining of (r, p)-discriminatory expressions.

An expression is an ordered token sequence that matches a document when its
tokens occur in the document in the same order, with any gaps in between.
Its recall is the fraction of positive documents it matches and its
precision the fraction of matched documents that are positive.

``mine`` runs a breadth-first search per source document: the document's
unique tokens, ordered by CF-ICF, seed a FIFO queue; a candidate that
reaches the recall threshold is accepted when it also reaches the precision
threshold (and is not made only of stop words), otherwise it is extended
by one more token of the same document until ``alpha`` tokens. Candidates
below the recall threshold are pruned, which is safe because extending an
expression can only shrink the set of documents it matches.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus, StopWordSet
from .features import Feature, FeatureSet, Method
from .ranking import TermStats, cficf_scores, order_tokens

__all__ = [
    "Expression",
    "ExpressionIndex",
    "ExpressionStats",
    "MiningConfig",
    "extend",
    "expression_stats",
    "matches",
    "mine",
    "select_top",
    "vectorize",
]

log = logging.getLogger(__name__)


def matches(expr: Sequence[str], doc_tokens: Sequence[str]) -> bool:
    """True iff ``expr`` is an ordered (gapped) subsequence of ``doc_tokens``."""
    it = iter(doc_tokens)
    return all(tok in it for tok in expr)


@dataclass(frozen=True)
class ExpressionStats:
    tp: int
    fp: int
    positive_count: int

    @property
    def recall(self) -> float:
        return self.tp / self.positive_count if self.positive_count else 0.0

    @property
    def precision(self) -> float:
        matched = self.tp + self.fp
        return self.tp / matched if matched else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass(frozen=True)
class Expression:
    tokens: tuple[str, ...]
    source_doc: int
    precision: float
    recall: float
    tp: int = 0
    fp: int = 0

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def to_dict(self) -> dict:
        return {
            "tokens": list(self.tokens),
            "precision": self.precision,
            "recall": self.recall,
            "source_doc": self.source_doc,
        }


@dataclass(frozen=True)
class MiningConfig:
    """Search parameters. No defaults for the thresholds on purpose."""

    r: float
    p: float
    alpha: int
    stopwords: StopWordSet = field(default_factory=lambda: StopWordSet(frozenset()))
    max_queue: int = 10_000
    documents: str = "positive"  # or "all"

    def __post_init__(self):
        # r > 1 is accepted and simply unsatisfiable
        if self.r <= 0:
            raise ValueError(f"r must be > 0, got {self.r}")
        if not 0 < self.p <= 1:
            raise ValueError(f"p must be in (0, 1], got {self.p}")
        if self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if self.max_queue < 1:
            raise ValueError("max_queue must be >= 1")
        if self.documents not in ("positive", "all"):
            raise ValueError(f"documents must be 'positive' or 'all', got {self.documents!r}")


class ExpressionIndex:
    """Inverted index over a labelled collection for fast expression counting.

    Counts are cached per token sequence; the index is append-free once built.
    """

    def __init__(self, token_lists: Sequence[Sequence[str]], labels: Sequence[bool]):
        self.docs = [tuple(t) for t in token_lists]
        self.labels = np.asarray(labels, dtype=bool)
        if len(self.docs) != len(self.labels):
            raise ValueError("token_lists and labels differ in length")
        self.positive_count = int(self.labels.sum())
        postings: dict[str, set[int]] = {}
        for i, toks in enumerate(self.docs):
            for tok in set(toks):
                postings.setdefault(tok, set()).add(i)
        self.postings = postings
        self._cache: dict[tuple[str, ...], ExpressionStats] = {}

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "ExpressionIndex":
        return cls(corpus.token_lists, corpus.labels)

    def matching_docs(self, expr: Sequence[str]) -> list[int]:
        expr = tuple(expr)
        if not expr:
            return list(range(len(self.docs)))
        sets = []
        for tok in set(expr):
            s = self.postings.get(tok)
            if not s:
                return []
            sets.append(s)
        sets.sort(key=len)
        cand = set.intersection(*sets) if len(sets) > 1 else sets[0]
        if len(expr) == 1:
            return sorted(cand)
        return sorted(i for i in cand if matches(expr, self.docs[i]))

    def stats(self, expr: Sequence[str]) -> ExpressionStats:
        expr = tuple(expr)
        hit = self._cache.get(expr)
        if hit is None:
            docs = self.matching_docs(expr)
            tp = int(self.labels[docs].sum()) if docs else 0
            hit = ExpressionStats(tp, len(docs) - tp, self.positive_count)
            self._cache[expr] = hit
        return hit


def expression_stats(expr: Sequence[str], token_lists: Sequence[Sequence[str]], labels: Sequence[bool]) -> ExpressionStats:
    """Document-level tp/fp of ``expr``; each document matches at most once."""
    tp = fp = 0
    for toks, lab in zip(token_lists, labels):
        if matches(expr, toks):
            if lab:
                tp += 1
            else:
                fp += 1
    return ExpressionStats(tp, fp, int(sum(bool(x) for x in labels)))


def extend(
    expr: Sequence[str],
    doc_tokens: Sequence[str],
    alpha: int,
    order: Sequence[str] | None = None,
) -> list[tuple[str, ...]]:
    """One-token extensions of ``expr`` that still match ``doc_tokens``.

    A token of the document is inserted at every position of ``expr``; only
    results that remain ordered subsequences of the document are kept.
    Output follows ``order`` (the document's tokens by descending CF-ICF;
    first-occurrence order when omitted), then insertion position.
    """
    expr = tuple(expr)
    if len(expr) >= alpha:
        return []
    if order is None:
        order = list(dict.fromkeys(doc_tokens))
    out: list[tuple[str, ...]] = []
    seen: set[tuple[str, ...]] = set()
    for tok in order:
        for i in range(len(expr) + 1):
            cand = expr[:i] + (tok,) + expr[i:]
            if cand in seen:
                continue
            seen.add(cand)
            if matches(cand, doc_tokens):
                out.append(cand)
    return out


def _search_document(
    doc_id: int,
    doc_tokens: Sequence[str],
    scores: dict[str, float],
    index: ExpressionIndex,
    config: MiningConfig,
) -> Expression | None:
    order = order_tokens(doc_tokens, scores)
    queue = deque((t,) for t in order)
    queued = set(queue)
    pops = 0
    while queue and pops < config.max_queue:
        e = queue.popleft()
        pops += 1
        st = index.stats(e)
        if st.recall < config.r:
            continue
        if st.precision >= config.p and not config.stopwords.all_stop(e):
            return Expression(e, doc_id, st.precision, st.recall, st.tp, st.fp)
        if len(e) < config.alpha:
            for cand in extend(e, doc_tokens, config.alpha, order):
                if cand not in queued:
                    queued.add(cand)
                    queue.append(cand)
    return None


def mine(
    data: Corpus | Sequence[Sequence[str]],
    config: MiningConfig,
    labels: Sequence[bool] | None = None,
    stats: TermStats | None = None,
    index: ExpressionIndex | None = None,
) -> list[Expression]:
    """Mine the set of discriminatory expressions from a training collection.

    Args:
        data: a Corpus, or a list of token sequences together with ``labels``.
        config: thresholds and search bounds.
        labels: required when ``data`` is a list of token sequences.
        stats, index: precomputed structures for the same collection.

    Returns:
        Deduplicated expressions in order of first acceptance. Each carries
        the id of the first document whose search produced it.
    """
    if isinstance(data, Corpus):
        token_lists = data.token_lists
        labels = data.labels.tolist() if labels is None else list(labels)
    else:
        if labels is None:
            raise ValueError("labels are required with raw token lists")
        token_lists = [tuple(t) for t in data]
        labels = list(labels)
    if not any(labels) or all(labels):
        raise ValueError("mining needs both positive and negative documents")
    stats = stats or TermStats.from_tokens(token_lists, labels)
    index = index or ExpressionIndex(token_lists, labels)
    scores = cficf_scores(stats)

    found: dict[tuple[str, ...], Expression] = {}
    for doc_id, (toks, lab) in enumerate(zip(token_lists, labels)):
        if config.documents == "positive" and not lab:
            continue
        expr = _search_document(doc_id, toks, scores, index, config)
        if expr is not None and expr.tokens not in found:
            found[expr.tokens] = expr
    log.debug("mined %d expressions from %d documents", len(found), len(token_lists))
    return list(found.values())


def _rank_key(e: Expression):
    return (-e.f1, -e.precision, len(e.tokens), e.tokens)


def select_top(expressions: Iterable[Expression], k: int) -> FeatureSet:
    """Best ``k`` expressions by F1 of (precision, recall) on the training split.

    Ties go to higher precision, then shorter expressions, then token order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(expressions, key=_rank_key)
    chosen = tuple(
        Feature(e.tokens, e.f1, e.precision, e.recall, e.source_doc) for e in ranked[:k]
    )
    warnings = () if len(chosen) == k else (f"DE: only {len(chosen)} expressions mined for k={k}",)
    return FeatureSet(Method.DE, chosen, k, len(chosen) < k, warnings)


def vectorize(
    data: Corpus | Sequence[Sequence[str]],
    features: FeatureSet | Sequence[Sequence[str]],
) -> np.ndarray:
    """Binary document x feature matrix: 1 iff the feature matches the document."""
    token_lists = data.token_lists if isinstance(data, Corpus) else [tuple(t) for t in data]
    exprs = features.expressions if isinstance(features, FeatureSet) else [tuple(f) for f in features]
    index = ExpressionIndex(token_lists, np.zeros(len(token_lists), dtype=bool))
    X = np.zeros((len(token_lists), len(exprs)), dtype=np.uint8)
    for j, expr in enumerate(exprs):
        rows = index.matching_docs(expr)
        if rows:
            X[rows, j] = 1
    return X
