"""TF-IDF and the class-oriented CF-ICF term ranking.

All logarithms are natural. ``tf`` normalizes a term's count in a document
by the largest count of that same term in any document of the collection.
``cf`` is the count of a term in the concatenation of all positive
documents, normalized by the count of the most frequent term there, so it
lies in [0, 1] and CF-ICF is bounded by ``ln n``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Corpus

__all__ = [
    "TermStats",
    "cf",
    "cficf",
    "cficf_scores",
    "icf",
    "idf",
    "order_tokens",
    "tf",
    "tfidf",
]


@dataclass(frozen=True)
class TermStats:
    """Per-term counts for one labelled collection (one training split).

    Attributes:
        n: number of documents.
        positive_count: number of positive documents.
        doc_counts: per document, a Counter of raw term occurrences f(t, d).
        max_count: term -> max over documents of f(t, d).
        df: term -> number of documents containing the term.
        class_count: term -> total occurrences over positive documents.
        n_pos_docs: term -> positive documents containing the term.
        n_neg_docs: term -> negative documents containing the term.
        max_class_count: occurrences of the most frequent term among positives.
    """

    n: int
    positive_count: int
    doc_counts: tuple[Counter, ...]
    max_count: dict[str, int]
    df: dict[str, int]
    class_count: dict[str, int]
    n_pos_docs: dict[str, int]
    n_neg_docs: dict[str, int]
    max_class_count: int

    @classmethod
    def from_tokens(cls, token_lists: Sequence[Sequence[str]], labels: Sequence[bool]) -> "TermStats":
        if len(token_lists) != len(labels):
            raise ValueError("token_lists and labels differ in length")
        doc_counts = tuple(Counter(toks) for toks in token_lists)
        max_count: dict[str, int] = {}
        df: Counter = Counter()
        class_count: Counter = Counter()
        n_pos: Counter = Counter()
        n_neg: Counter = Counter()
        for counts, label in zip(doc_counts, labels):
            for term, c in counts.items():
                if c > max_count.get(term, 0):
                    max_count[term] = c
                df[term] += 1
                if label:
                    class_count[term] += c
                    n_pos[term] += 1
                else:
                    n_neg[term] += 1
        return cls(
            n=len(doc_counts),
            positive_count=int(sum(bool(x) for x in labels)),
            doc_counts=doc_counts,
            max_count=max_count,
            df=dict(df),
            class_count=dict(class_count),
            n_pos_docs=dict(n_pos),
            n_neg_docs=dict(n_neg),
            max_class_count=max(class_count.values(), default=0),
        )

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "TermStats":
        return cls.from_tokens(corpus.token_lists, corpus.labels.tolist())

    @property
    def vocabulary(self) -> list[str]:
        return sorted(self.df)

    @property
    def positive_vocabulary(self) -> list[str]:
        return sorted(self.class_count)


def tf(term: str, doc: int, stats: TermStats) -> float:
    """f(t, d) / max over d' of f(t, d'); 0 for a term absent everywhere."""
    top = stats.max_count.get(term, 0)
    if top == 0:
        return 0.0
    return stats.doc_counts[doc].get(term, 0) / top


def idf(term: str, stats: TermStats) -> float:
    df = stats.df.get(term, 0)
    if df == 0:
        raise KeyError(f"unseen term {term!r}")
    return math.log(stats.n / df)


def tfidf(term: str, doc: int, stats: TermStats) -> float:
    f = stats.doc_counts[doc].get(term, 0)
    if f == 0:
        return 0.0
    return tf(term, doc, stats) * idf(term, stats)


def cf(term: str, stats: TermStats) -> float:
    """Normalized class frequency of ``term`` in the concatenated positive documents."""
    if stats.positive_count < 1:
        raise ValueError("cf needs at least one positive document")
    if stats.max_class_count == 0:
        return 0.0
    return stats.class_count.get(term, 0) / stats.max_class_count


def icf(term: str, stats: TermStats) -> float:
    """log(n / (number of negative documents containing term + 1))."""
    if stats.n < 1:
        raise ValueError("icf needs a non-empty collection")
    return math.log(stats.n / (stats.n_neg_docs.get(term, 0) + 1))


def cficf(term: str, stats: TermStats) -> float:
    return cf(term, stats) * icf(term, stats)


def cficf_scores(stats: TermStats, terms: Iterable[str] | None = None) -> dict[str, float]:
    """CF-ICF for ``terms`` (default: every term in the collection)."""
    if terms is None:
        terms = stats.df
    return {t: cficf(t, stats) for t in terms}


def order_tokens(doc_tokens: Sequence[str], scores: dict[str, float]) -> list[str]:
    """Unique tokens of a document by descending score, ties by first occurrence.

    Tokens missing from ``scores`` count as 0.
    """
    first: dict[str, int] = {}
    for pos, tok in enumerate(doc_tokens):
        first.setdefault(tok, pos)
    return sorted(first, key=lambda t: (-scores.get(t, 0.0), first[t]))
