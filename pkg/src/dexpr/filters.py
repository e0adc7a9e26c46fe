"""Classical filter feature-selection scores over binary term presence.

Every score is built from a 2x2 document contingency table for one term and
the positive class. The log-based scores guard zero probabilities with an
additive epsilon inside the logarithm only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .corpus import Corpus, StopWordSet
from .features import Feature, FeatureSet, Method, rank_features
from .ranking import TermStats

__all__ = [
    "ContingencyTable",
    "DegenerateTableError",
    "anova_f",
    "contingency",
    "filter_score",
    "select_k",
]

EPS = 1e-12


class DegenerateTableError(ValueError):
    pass


@dataclass(frozen=True)
class ContingencyTable:
    """Document counts for a term t and the positive class c.

    n11: t and c; n10: t and not c; n01: not t and c; n00: neither.
    """

    n11: int
    n10: int
    n01: int
    n00: int

    @property
    def D(self) -> int:
        return self.n11 + self.n10 + self.n01 + self.n00

    @property
    def positives(self) -> int:
        return self.n11 + self.n01

    @property
    def negatives(self) -> int:
        return self.n10 + self.n00

    @property
    def p_t(self) -> float:
        return (self.n11 + self.n10) / self.D

    @property
    def p_c(self) -> float:
        return self.positives / self.D

    @property
    def p_t_given_c(self) -> float:
        return self.n11 / self.positives

    @property
    def p_t_given_not_c(self) -> float:
        return self.n10 / self.negatives

    @property
    def p_c_given_t(self) -> float:
        present = self.n11 + self.n10
        return self.n11 / present if present else 0.0

    def check(self) -> None:
        if min(self.n11, self.n10, self.n01, self.n00) < 0:
            raise DegenerateTableError(f"negative count in {self}")
        if self.positives == 0 or self.negatives == 0:
            raise DegenerateTableError("both classes must be non-empty")


def contingency(term: str, stats: TermStats) -> ContingencyTable:
    """Presence counts for ``term`` (a document counts once however often t occurs)."""
    n11 = stats.n_pos_docs.get(term, 0)
    n10 = stats.n_neg_docs.get(term, 0)
    pos = stats.positive_count
    neg = stats.n - pos
    return ContingencyTable(n11, n10, pos - n11, neg - n10)


def _log(num: float, den: float) -> float:
    return math.log((num + EPS) / (den + EPS))


def _chi2(t: ContingencyTable, denominator: str) -> float:
    ptc, ptn = t.p_t_given_c, t.p_t_given_not_c
    diff = ptc * (1 - ptn) - (1 - ptc) * ptn
    pt, pc = t.p_t, t.p_c
    if denominator == "product":
        den = pt * (1 - pt) * pc * (1 - pc)
        if den == 0:
            return 0.0  # term in no document or in all of them
    elif denominator == "literal":
        den = pt * (1 - pt) - pc * (1 - pc)
        if den == 0:
            raise ZeroDivisionError("literal CHI2 denominator p(t)p(~t) - p(c)p(~c) is zero")
    else:
        raise ValueError(f"unknown CHI2 denominator mode {denominator!r}")
    return t.D * diff**2 / den


def _ig(t: ContingencyTable) -> float:
    ptc, pt, pc = t.p_t_given_c, t.p_t, t.p_c
    return ptc * _log(ptc, pt * pc) + (1 - ptc) * _log(1 - ptc, (1 - pt) * pc)


def _mi(t: ContingencyTable) -> float:
    return _log(t.p_t_given_c, t.p_t * t.p_c)


def _or(t: ContingencyTable) -> float:
    ptc, ptn = t.p_t_given_c, t.p_t_given_not_c
    return _log(ptc * (1 - ptn), (1 - ptc) * ptn)


def _ece(t: ContingencyTable) -> float:
    pct, pc = t.p_c_given_t, t.p_c
    return t.p_t * (pct * _log(pct, pc) + (1 - pct) * _log(1 - pct, 1 - pc))


def _gss(t: ContingencyTable) -> float:
    ptc, ptn = t.p_t_given_c, t.p_t_given_not_c
    return ptc * (1 - ptn) - ptn * (1 - ptc)


def _anova(t: ContingencyTable) -> float:
    # one-way F over 0/1 presence values grouped by class
    npos, nneg = t.positives, t.negatives
    m1, m0 = t.n11 / npos, t.n10 / nneg
    grand = (t.n11 + t.n10) / t.D
    between = npos * (m1 - grand) ** 2 + nneg * (m0 - grand) ** 2
    within = npos * m1 * (1 - m1) + nneg * m0 * (1 - m0)
    if between <= 0:
        return 0.0
    if within <= 0:
        return math.inf
    return between / (within / (t.D - 2))


_SCORERS = {
    Method.IG: _ig,
    Method.MI: _mi,
    Method.OR: _or,
    Method.ECE: _ece,
    Method.GSS: _gss,
    Method.ANOVA: _anova,
}


def filter_score(method: Method | str, table: ContingencyTable, chi2_denominator: str = "product") -> float:
    """Score one contingency table with a filter method.

    ``chi2_denominator="product"`` divides by p(t)p(~t)p(c)p(~c);
    ``"literal"`` uses p(t)p(~t) - p(c)p(~c) and raises ZeroDivisionError
    when that difference vanishes.
    """
    method = Method.parse(method) if isinstance(method, str) else method
    table.check()
    if method is Method.CHI2:
        return _chi2(table, chi2_denominator)
    if method not in _SCORERS:
        raise ValueError(f"{method.value} is not a filter method")
    return _SCORERS[method](table)


def anova_f(term: str, stats: TermStats) -> float:
    """One-way ANOVA F of term presence between the two classes (inf if perfectly separated)."""
    return filter_score(Method.ANOVA, contingency(term, stats))


def select_k(
    data: Corpus | TermStats,
    method: Method | str,
    k: int,
    stopwords: StopWordSet | None = None,
    chi2_denominator: str = "product",
    labels: Sequence[bool] | None = None,
) -> FeatureSet:
    """Top-``k`` single terms by filter score; ties broken lexicographically.

    ``data`` is a corpus (its labels are used unless ``labels`` overrides
    them) or precomputed TermStats. Terms in ``stopwords`` are skipped.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    method = Method.parse(method) if isinstance(method, str) else method
    if isinstance(data, Corpus):
        lab = data.labels.tolist() if labels is None else list(labels)
        stats = TermStats.from_tokens(data.token_lists, lab)
    else:
        stats = data
    scored = []
    for term in stats.df:
        if stopwords is not None and term in stopwords:
            continue
        scored.append(Feature((term,), filter_score(method, contingency(term, stats), chi2_denominator)))
    ranked = rank_features(scored)
    chosen = tuple(ranked[:k])
    warnings = () if len(chosen) == k else (f"{method.value}: only {len(chosen)} terms available for k={k}",)
    return FeatureSet(method, chosen, k, len(chosen) < k, warnings)
