"""Frequency-based text prototypes for caption clusters.

Per class: words appearing in more than ``beta`` of the captions are
nonrepresentative (they describe the whole class, not a cluster). Per
cluster: the remaining words are ranked by document frequency, the top-k
become the representative words, and the caption matching them with the
highest summed frequency is the cluster's text prototype.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .stopwords import STOP_WORDS

# Unicode letters and digits are token characters; everything else
# (punctuation, underscores, whitespace) separates tokens.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase tokens in order, duplicates preserved."""
    return _TOKEN_RE.findall(text.lower())


def remove_stop_words(words: Iterable[str]) -> list[str]:
    return [w for w in words if w not in STOP_WORDS]


@dataclass
class Vocabulary:
    """Class-level document frequencies: captions containing each word."""

    doc_freq: dict[str, int]
    class_size: int


@dataclass(frozen=True)
class NonrepresentativeSet:
    """Words whose class-level document proportion strictly exceeds beta."""

    words: frozenset[str]
    beta: float


@dataclass
class RepresentativeWords:
    """Top-k (word, cluster document frequency) pairs, frequency-descending."""

    entries: list[tuple[str, int]]

    def words(self) -> set[str]:
        return {w for w, _ in self.entries}

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class TextPrototype:
    text: str
    score: int
    cluster_id: int
    representative_words: RepresentativeWords


def _doc_frequencies(captions: Sequence[str]) -> Counter[str]:
    freq: Counter[str] = Counter()
    for caption in captions:
        freq.update(set(remove_stop_words(tokenize(caption))))
    return freq


def class_vocabulary(class_captions: Sequence[str]) -> Vocabulary:
    """Document frequency over one class's captions, stop words excluded."""
    if not class_captions:
        raise ValueError("class_captions must be non-empty")
    return Vocabulary(doc_freq=dict(_doc_frequencies(class_captions)), class_size=len(class_captions))


def nonrepresentative_words(vocab: Vocabulary, beta: float) -> NonrepresentativeSet:
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    words = frozenset(
        w for w, f in vocab.doc_freq.items() if f / vocab.class_size > beta
    )
    return NonrepresentativeSet(words=words, beta=beta)


def cluster_representative_words(
    cluster_captions: Sequence[str],
    nonrep: NonrepresentativeSet,
    top_k: int,
) -> RepresentativeWords:
    """Top-k cluster words by (frequency desc, word asc), after exclusions.

    Frequencies are document frequencies within the cluster. Stop words
    and class-level nonrepresentative words never appear. Fewer than k
    entries come back when the eligible vocabulary is smaller than k.
    """
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    freq = _doc_frequencies(cluster_captions)
    eligible = [(w, f) for w, f in freq.items() if w not in nonrep.words]
    eligible.sort(key=lambda entry: (-entry[1], entry[0]))
    return RepresentativeWords(entries=eligible[:top_k])


def score_caption(caption: str, representative: RepresentativeWords) -> int:
    """Sum of frequencies of representative words present in the caption.

    Membership is set-valued: a word contributes its frequency once no
    matter how many times it occurs in the caption.
    """
    present = set(tokenize(caption))
    return sum(f for w, f in representative.entries if w in present)


def select_text_prototype(
    cluster_captions: Sequence[str],
    representative: RepresentativeWords,
    cluster_id: int,
) -> TextPrototype:
    """The highest-scoring caption; ties go to the earlier caption index."""
    if not cluster_captions:
        raise ValueError("cluster_captions must be non-empty")
    best_index = 0
    best_score = score_caption(cluster_captions[0], representative)
    for i, caption in enumerate(cluster_captions[1:], start=1):
        score = score_caption(caption, representative)
        if score > best_score:
            best_index, best_score = i, score
    return TextPrototype(
        text=cluster_captions[best_index],
        score=best_score,
        cluster_id=cluster_id,
        representative_words=representative,
    )
