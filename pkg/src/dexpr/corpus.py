"""Corpus ingestion: tokenizing, stemming, label binarization and CV folds."""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import snowballstemmer

__all__ = [
    "Corpus",
    "CorpusError",
    "Document",
    "FoldPlan",
    "StopWordSet",
    "build_corpus",
    "is_protected",
    "load_csv",
    "load_sls",
    "load_stopwords",
    "make_folds",
    "preprocess",
    "stem",
    "tokenize",
]

log = logging.getLogger(__name__)

LANGUAGES = ("english", "spanish")


class CorpusError(ValueError):
    """Raised for unreadable inputs or degenerate (single-class) tasks."""


# ---------------------------------------------------------------------------
# tokenization
# ---------------------------------------------------------------------------

_URL = r"(?:https?://|www\.)[^\s]+"
_MENTION = r"@\w+"
_HASHTAG = r"#\w+"
_EMOTICON = (
    r"(?:[<>]?[:;=8][\-o\*']?[\)\]\(\[dDpP/:\}\{@\|\\]"
    r"|[\)\]\(\[dDpP/:\}\{@\|\\][\-o\*']?[:;=8][<>]?"
    r"|<3)"
)
_WORD = r"[^\W_]+"

_TOKEN_RE = re.compile(
    rf"(?P<url>{_URL})|(?P<mention>{_MENTION})|(?P<hashtag>{_HASHTAG})"
    rf"|(?P<emoticon>{_EMOTICON})|(?P<word>{_WORD})",
    re.UNICODE,
)
_PROTECTED_RE = re.compile(rf"(?:{_URL}|{_MENTION}|{_HASHTAG}|{_EMOTICON})\Z", re.UNICODE)
_URL_TRAILING = ".,!?;:)]}'\""


def tokenize(raw_text: str) -> list[str]:
    """Split raw text into lowercase tokens.

    URLs, @mentions, #hashtags and emoticons are kept whole; everything else
    is split on non-alphanumeric characters and punctuation is dropped.
    Emoticons keep their case (``:D`` and ``:d`` are different faces).
    """
    tokens = []
    for m in _TOKEN_RE.finditer(raw_text):
        kind = m.lastgroup
        tok = m.group()
        if kind == "url":
            tok = tok.rstrip(_URL_TRAILING).lower()
        elif kind != "emoticon":
            tok = tok.lower()
        if tok:
            tokens.append(tok)
    return tokens


def is_protected(token: str) -> bool:
    """True for URL, mention, hashtag and emoticon tokens (never stemmed)."""
    return _PROTECTED_RE.match(token) is not None


@lru_cache(maxsize=None)
def _stemmer(language: str):
    if language not in LANGUAGES:
        raise CorpusError(f"unsupported language {language!r}; expected one of {LANGUAGES}")
    return snowballstemmer.stemmer(language)


def stem(tokens: Sequence[str], language: str = "english") -> list[str]:
    """Snowball-stem every unprotected token, preserving length and order."""
    stemmer = _stemmer(language)
    return [tok if is_protected(tok) else stemmer.stemWord(tok) for tok in tokens]


def preprocess(raw_text: str, language: str = "english") -> list[str]:
    return stem(tokenize(raw_text), language)


# ---------------------------------------------------------------------------
# stop words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StopWordSet:
    words: frozenset[str]
    language: str = "english"

    def __contains__(self, token: str) -> bool:
        return token in self.words

    def __len__(self) -> int:
        return len(self.words)

    def all_stop(self, tokens: Iterable[str]) -> bool:
        return all(t in self.words for t in tokens)


def load_stopwords(
    language: str = "english",
    extra_path: str | Path | None = None,
    extra_words: Iterable[str] = (),
    include_default: bool = True,
) -> StopWordSet:
    """Build the stemmed stop-word set for ``language``.

    The bundled list is the standard per-language one; ``extra_path`` points
    at a UTF-8 file with one word per line for custom additions.
    """
    raw: list[str] = []
    if include_default:
        text = resources.files("dexpr.data.stopwords").joinpath(f"{language}.txt")
        if not text.is_file():
            raise CorpusError(f"no stop-word list for language {language!r}")
        raw.extend(text.read_text(encoding="utf-8").split())
    if extra_path is not None:
        with open(extra_path, encoding="utf-8") as fh:
            raw.extend(line.strip() for line in fh if line.strip())
    raw.extend(extra_words)
    words = set()
    for w in raw:
        for tok in tokenize(w):
            words.update(stem([tok], language))
    return StopWordSet(frozenset(words), language)


# ---------------------------------------------------------------------------
# documents and corpora
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Document:
    id: int
    raw_text: str
    tokens: tuple[str, ...]
    label: bool


@dataclass(frozen=True)
class Corpus:
    """Immutable, densely indexed collection of preprocessed documents."""

    documents: tuple[Document, ...]
    language: str = "english"
    dropped: int = 0

    def __post_init__(self):
        for i, doc in enumerate(self.documents):
            if doc.id != i:
                raise CorpusError(f"document ids must be dense 0..n-1, got {doc.id} at {i}")

    @property
    def n(self) -> int:
        return len(self.documents)

    @property
    def positive_count(self) -> int:
        return sum(d.label for d in self.documents)

    @property
    def negative_count(self) -> int:
        return self.n - self.positive_count

    @property
    def labels(self) -> np.ndarray:
        return np.fromiter((d.label for d in self.documents), dtype=bool, count=self.n)

    @property
    def token_lists(self) -> list[tuple[str, ...]]:
        return [d.tokens for d in self.documents]

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.documents)

    def subset(self, ids: Iterable[int]) -> "Corpus":
        """Corpus restricted to ``ids`` (in the given order), re-indexed from 0."""
        docs = tuple(
            Document(i, self.documents[j].raw_text, self.documents[j].tokens, self.documents[j].label)
            for i, j in enumerate(ids)
        )
        return Corpus(docs, self.language, 0)


def build_corpus(
    texts: Iterable[str],
    labels: Iterable[bool],
    language: str = "english",
    require_both_classes: bool = True,
) -> Corpus:
    """Preprocess raw texts; documents that end up with no tokens are dropped."""
    docs = []
    dropped = 0
    for text, label in zip(texts, labels):
        tokens = tuple(preprocess(text, language))
        if not tokens:
            dropped += 1
            continue
        docs.append(Document(len(docs), text, tokens, bool(label)))
    if dropped:
        log.warning("dropped %d document(s) with no tokens after preprocessing", dropped)
    corpus = Corpus(tuple(docs), language, dropped)
    if require_both_classes:
        if corpus.positive_count == 0:
            raise CorpusError("zero positive documents after binarization")
        if corpus.negative_count == 0:
            raise CorpusError("zero negative documents after binarization")
    return corpus


def load_csv(
    path: str | Path,
    text_column: str = "text",
    label_column: str = "label",
    positive_class: str = "1",
    language: str = "english",
    delimiter: str = ",",
) -> Corpus:
    """Read a UTF-8 CSV with a header row and binarize labels one-vs-rest."""
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"missing file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        for col in (text_column, label_column):
            if col not in header:
                raise CorpusError(f"missing column {col!r} in {path} (have {header})")
        rows = list(reader)
    if len(rows) < 2:
        raise CorpusError(f"{path} needs at least 2 rows, found {len(rows)}")
    texts = [(r[text_column] or "") for r in rows]
    labels = [str(r[label_column]).strip() == str(positive_class) for r in rows]
    return build_corpus(texts, labels, language)


def load_sls(path: str | Path, language: str = "english") -> Corpus:
    """Load the UCI Sentiment Labelled Sentences data.

    ``path`` is either one ``*_labelled.txt`` file or the unzipped directory,
    in which case all three sources are concatenated (3000 sentences).
    Lines are ``sentence<TAB>0|1``; label 1 is the positive class. The file
    is read line by line because the imdb file has unbalanced quotes that
    confuse CSV readers.
    """
    path = Path(path)
    if path.is_dir():
        # amazon_cells_labelled.txt, imdb_labelled.txt, yelp_labelled.txt
        files = sorted(path.glob("*_labelled.txt"))
        if not files:
            raise CorpusError(f"no SLS files under {path}")
    elif path.is_file():
        files = [path]
    else:
        raise CorpusError(f"missing file: {path}")
    texts, labels = [], []
    for f in files:
        with open(f, encoding="utf-8", errors="replace") as fh:
            for line in fh:
                line = line.rstrip("\r\n")
                if not line.strip():
                    continue
                text, sep, label = line.rpartition("\t")
                if not sep or label.strip() not in ("0", "1"):
                    raise CorpusError(f"malformed SLS line in {f}: {line[:60]!r}")
                texts.append(text)
                labels.append(label.strip() == "1")
    return build_corpus(texts, labels, language)


# ---------------------------------------------------------------------------
# cross-validation folds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldPlan:
    """Deterministic assignment of documents to ``k`` folds.

    In ``standard`` mode fold ``i`` is the test set; in ``reversed`` mode it
    is the training set and the other ``k - 1`` folds are tested.
    """

    k: int
    assignments: tuple[int, ...]
    mode: str = "standard"
    seed: int = 0
    stratified: bool = False
    _members: tuple[np.ndarray, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        members = tuple(
            np.flatnonzero(np.asarray(self.assignments) == i) for i in range(self.k)
        )
        object.__setattr__(self, "_members", members)

    @property
    def n(self) -> int:
        return len(self.assignments)

    def fold(self, i: int) -> np.ndarray:
        return self._members[i]

    def split(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(train_ids, test_ids) for fold ``i``, each sorted ascending."""
        inside = self._members[i]
        outside = np.flatnonzero(np.asarray(self.assignments) != i)
        if self.mode == "reversed":
            return inside, outside
        return outside, inside

    def __iter__(self):
        return (self.split(i) for i in range(self.k))


def make_folds(
    n: int,
    k: int,
    seed: int = 0,
    mode: str = "standard",
    labels: Sequence[bool] | None = None,
) -> FoldPlan:
    """Shuffle ``range(n)`` with a seeded RNG and deal it round-robin into k folds.

    Passing ``labels`` stratifies: documents are grouped by label before
    dealing, so every fold receives a near-equal share of each class.
    """
    if mode not in ("standard", "reversed"):
        raise ValueError(f"mode must be 'standard' or 'reversed', got {mode!r}")
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if k > n:
        raise ValueError(f"cannot make {k} folds from {n} documents")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    if labels is not None:
        lab = np.asarray(labels, dtype=bool)
        if len(lab) != n:
            raise ValueError("labels length does not match n")
        order = np.concatenate([order[lab[order]], order[~lab[order]]])
    assignments = np.empty(n, dtype=int)
    assignments[order] = np.arange(n) % k
    return FoldPlan(k, tuple(int(a) for a in assignments), mode, seed, labels is not None)
