"""Bag-of-words feature extraction.

Pipeline order is fixed: tokenize, drop stopwords, stem, then form n-grams.
Because stopwords go first, bigrams can bridge a removed word
("survival of the fittest" yields the pair "survival fittest").
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyVocabulary
from .porter import stem
from .rubric import Corpus

STOPWORD_LIST_VERSION = 1

# letters (any script), optionally joined by straight or curly apostrophes
_TOKEN = re.compile(r"[^\W\d_]+(?:['’][^\W\d_]+)*")


@dataclass(frozen=True)
class FeatureConfig:
    lowercase: bool = True
    stemming: bool = True
    stopword_list_id: str = "default"
    ngram_orders: tuple[int, ...] = (1,)
    min_document_frequency: int = 1
    remove_misclassified: bool = False

    def __post_init__(self) -> None:
        orders = tuple(sorted(set(int(n) for n in self.ngram_orders)))
        if not orders or not set(orders) <= {1, 2}:
            raise ValueError(f"ngram_orders must be a non-empty subset of {{1, 2}}, got {self.ngram_orders}")
        if self.stopword_list_id not in ("none", "default"):
            raise ValueError(f"unknown stopword list {self.stopword_list_id!r}")
        if int(self.min_document_frequency) < 1:
            raise ValueError("min_document_frequency must be >= 1")
        object.__setattr__(self, "ngram_orders", orders)

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "stemming": self.stemming,
            "stopword_list_id": self.stopword_list_id,
            "ngram_orders": list(self.ngram_orders),
            "min_document_frequency": self.min_document_frequency,
            "remove_misclassified": self.remove_misclassified,
        }

    @classmethod
    def from_dict(cls, d: dict) -> FeatureConfig:
        return cls(
            lowercase=bool(d.get("lowercase", True)),
            stemming=bool(d.get("stemming", True)),
            stopword_list_id=d.get("stopword_list_id", "default"),
            ngram_orders=tuple(d.get("ngram_orders", (1,))),
            min_document_frequency=int(d.get("min_document_frequency", 1)),
            remove_misclassified=bool(d.get("remove_misclassified", False)),
        )


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Split text into alphabetic tokens; digits and punctuation separate tokens."""
    tokens = _TOKEN.findall(text)
    return [t.lower() for t in tokens] if lowercase else tokens


def load_stopwords(path) -> frozenset[str]:
    """Read a stopword file: one term per line, blank lines ignored."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


@lru_cache(maxsize=None)
def default_stopwords() -> frozenset[str]:
    ref = resources.files("evgr") / "data" / "stopwords_default.txt"
    with resources.as_file(ref) as path:
        return load_stopwords(path)


def remove_stopwords(tokens: Sequence[str], list_id: str = "default") -> list[str]:
    if list_id == "none":
        return list(tokens)
    if list_id != "default":
        raise ValueError(f"unknown stopword list {list_id!r}")
    stop = default_stopwords()
    return [t for t in tokens if t.lower() not in stop]


def extract_ngrams(tokens: Sequence[str], orders: Iterable[int]) -> list[str]:
    """All unigrams in position order, then all bigrams in position order."""
    orders = set(orders)
    out: list[str] = []
    if 1 in orders:
        out.extend(tokens)
    if 2 in orders:
        out.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    return out


def process(text: str, config: FeatureConfig) -> list[str]:
    """Run the full pipeline and return the term sequence for one text."""
    tokens = tokenize(text, config.lowercase)
    tokens = remove_stopwords(tokens, config.stopword_list_id)
    if config.stemming:
        tokens = [stem(t) for t in tokens]
    return extract_ngrams(tokens, config.ngram_orders)


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    fitted_config: FeatureConfig
    document_count: int
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        index = {t: i for i, t in enumerate(self.terms)}
        if len(index) != len(self.terms):
            raise ValueError("vocabulary terms must be unique")
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def fingerprint(self) -> str:
        payload = json.dumps(
            {"terms": list(self.terms), "config": self.fitted_config.to_dict()},
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "terms": list(self.terms),
            "config": self.fitted_config.to_dict(),
            "document_count": self.document_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Vocabulary:
        return cls(tuple(d["terms"]), FeatureConfig.from_dict(d["config"]), int(d["document_count"]))


def _texts(corpus: Corpus | Iterable[str]) -> list[str]:
    if isinstance(corpus, Corpus):
        return [r.text for r in corpus]
    return list(corpus)


def build_vocabulary(corpus: Corpus | Iterable[str], config: FeatureConfig) -> Vocabulary:
    """Fit a vocabulary of terms that appear in at least ``min_document_frequency`` responses.

    Terms are ordered by first occurrence in row order.
    """
    texts = _texts(corpus)
    if not texts:
        raise EmptyVocabulary("cannot fit a vocabulary on an empty corpus")
    doc_freq: Counter[str] = Counter()
    first_seen: dict[str, int] = {}
    for text in texts:
        terms = process(text, config)
        for t in terms:
            first_seen.setdefault(t, len(first_seen))
        doc_freq.update(set(terms))
    kept = [t for t in first_seen if doc_freq[t] >= config.min_document_frequency]
    if not kept:
        raise EmptyVocabulary(
            f"no term reaches min_document_frequency={config.min_document_frequency}"
        )
    return Vocabulary(tuple(kept), config, len(texts))


@dataclass(frozen=True)
class FeatureVector:
    """Sparse term counts: position -> count, absent positions are zero."""

    entries: dict[int, int]
    dimension: int

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dimension)
        for i, v in self.entries.items():
            out[i] = v
        return out

    def dot(self, dense: np.ndarray) -> float:
        if len(dense) != self.dimension:
            raise DimensionMismatch(f"vector has dimension {self.dimension}, weights {len(dense)}")
        return float(sum(dense[i] * v for i, v in sorted(self.entries.items())))


def vectorize(text: str, vocab: Vocabulary) -> FeatureVector:
    counts: dict[int, int] = {}
    index = vocab.index
    for term in process(text, vocab.fitted_config):
        pos = index.get(term)
        if pos is not None:
            counts[pos] = counts.get(pos, 0) + 1
    return FeatureVector(dict(sorted(counts.items())), len(vocab))


def to_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    """Stack sparse vectors into a dense ``(n, dimension)`` float array."""
    if not vectors:
        return np.zeros((0, 0))
    dim = vectors[0].dimension
    out = np.zeros((len(vectors), dim))
    for row, v in enumerate(vectors):
        if v.dimension != dim:
            raise DimensionMismatch(f"vector {row} has dimension {v.dimension}, expected {dim}")
        for i, c in v.entries.items():
            out[row, i] = c
    return out
