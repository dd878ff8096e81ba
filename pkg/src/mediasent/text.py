"""Tokenization, vocabulary and bag-of-words vectors.

Tokens are maximal runs of Unicode letters and digits, lowercased, with
single-character tokens dropped. No stemming and no stop-word removal.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    return [tok for tok in _TOKEN_RE.findall(text.lower()) if len(tok) > 1]


class Vocabulary:
    """Word <-> dense index bijection, in first-occurrence order."""

    def __init__(self, words: Iterable[str] = ()):
        self._words: list[str] = []
        self._index: dict[str, int] = {}
        for w in words:
            self.add(w)

    def add(self, word: str) -> int:
        idx = self._index.get(word)
        if idx is None:
            idx = len(self._words)
            self._words.append(word)
            self._index[word] = idx
        return idx

    def lookup(self, word: str) -> int | None:
        return self._index.get(word)

    def word_of(self, index: int) -> str:
        return self._words[index]

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(self._words)

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._words == other._words

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)})"

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["index", "word"])
            writer.writerows(enumerate(self._words))


def build_vocabulary(docs: Iterable[Sequence[str]]) -> Vocabulary:
    vocab = Vocabulary()
    for doc in docs:
        for tok in doc:
            vocab.add(tok)
    return vocab


@dataclass(frozen=True)
class DocVector:
    """Sparse in-vocabulary counts plus the total token count of the document."""

    counts: dict[int, int] = field(default_factory=dict)
    n_tokens: int = 0

    @property
    def oov(self) -> int:
        return self.n_tokens - sum(self.counts.values())


def vectorize(doc: Sequence[str], vocab: Vocabulary) -> DocVector:
    counts: Counter[int] = Counter()
    for tok in doc:
        idx = vocab.lookup(tok)
        if idx is not None:
            counts[idx] += 1
    return DocVector(dict(counts), len(doc))
