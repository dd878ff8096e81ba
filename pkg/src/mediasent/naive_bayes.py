"""Multinomial Naive Bayes with add-one smoothing.

Priors are relative document frequencies per class, conditionals are
``(W_cw + 1) / (sum_t W_ct + |V|)`` over the training vocabulary, and
documents are scored in log space. Out-of-vocabulary tokens are ignored
at classification time.
"""

from __future__ import annotations

import enum
import json
import struct
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from .errors import DataError
from .text import DocVector, Vocabulary


class SentimentClass(str, enum.Enum):
    positive = "positive"
    negative = "negative"
    irrelevant = "irrelevant"

    @classmethod
    def parse(cls, value: str) -> "SentimentClass":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise DataError(f"unknown sentiment label {value!r}") from None


CLASS_ORDER: tuple[SentimentClass, ...] = tuple(SentimentClass)


@dataclass(frozen=True)
class LabeledDoc:
    id: str
    doc: DocVector
    label: SentimentClass


@dataclass(frozen=True)
class ClassifiedDoc:
    id: str
    predicted: SentimentClass
    scores: dict[SentimentClass, float]


@dataclass
class NbModel:
    classes: tuple[SentimentClass, ...]
    log_prior: np.ndarray          # (C,)
    log_cond: np.ndarray           # (C, V)
    vocab: Vocabulary
    class_docs: np.ndarray = field(default=None, repr=False)   # N_c

    def prior(self, c: SentimentClass) -> float:
        return float(np.exp(self.log_prior[self.classes.index(c)]))

    def cond(self, word: str, c: SentimentClass) -> float:
        return float(np.exp(self.log_cond[self.classes.index(c), self.vocab.lookup(word)]))

    def scores(self, doc: DocVector) -> np.ndarray:
        s = self.log_prior.copy()
        if doc.counts:
            # sorted so the sum does not depend on token order
            keys = sorted(doc.counts)
            idx = np.array(keys, dtype=np.intp)
            cnt = np.array([doc.counts[k] for k in keys], dtype=float)
            s += self.log_cond[:, idx] @ cnt
        return s


def _doc_matrix(docs: Sequence[DocVector], n_words: int) -> sparse.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    for d in docs:
        # sorted for a fixed summation order
        for k in sorted(d.counts):
            indices.append(k)
            data.append(d.counts[k])
        indptr.append(len(indices))
    return sparse.csr_matrix((np.array(data, dtype=float), np.array(indices, dtype=np.intp),
                              np.array(indptr, dtype=np.intp)), shape=(len(docs), n_words))


def _fit(X: sparse.csr_matrix, y: np.ndarray, warn: bool = True):
    """Return (classes, log_prior, log_cond, class_docs) from counts X and label codes y."""
    n = X.shape[0]
    if n == 0:
        raise DataError("cannot train on an empty document set")
    if X.shape[1] == 0:
        raise DataError("cannot train with an empty vocabulary")
    present = []
    for code, c in enumerate(CLASS_ORDER):
        if np.any(y == code):
            present.append(code)
        elif warn:
            warnings.warn(f"class {c.value!r} has no training documents and is dropped",
                          stacklevel=3)
    counts = np.array([np.sum(y == code) for code in present], dtype=float)
    log_prior = np.log(counts) - np.log(n)
    W = np.vstack([np.asarray(X[y == code].sum(axis=0)).ravel() for code in present])
    totals = W.sum(axis=1, keepdims=True)
    log_cond = np.log(W + 1.0) - np.log(totals + X.shape[1])
    return tuple(CLASS_ORDER[c] for c in present), log_prior, log_cond, counts


def _codes(labels) -> np.ndarray:
    return np.array([CLASS_ORDER.index(l) for l in labels], dtype=int)


def train(docs: Sequence[LabeledDoc], vocab: Vocabulary) -> NbModel:
    """Fit priors and smoothed conditionals over ``vocab``."""
    X = _doc_matrix([d.doc for d in docs], len(vocab))
    classes, log_prior, log_cond, counts = _fit(X, _codes(d.label for d in docs))
    return NbModel(classes, log_prior, log_cond, vocab, counts)


def _argmax(scores: np.ndarray, log_prior: np.ndarray, classes) -> int:
    # ties: higher prior first, then fixed class order
    best = 0
    for i in range(1, len(classes)):
        a = (scores[i], log_prior[i], -CLASS_ORDER.index(classes[i]))
        b = (scores[best], log_prior[best], -CLASS_ORDER.index(classes[best]))
        if a > b:
            best = i
    return best


def classify(model: NbModel, doc: DocVector, id: str = "") -> ClassifiedDoc:
    s = model.scores(doc)
    best = _argmax(s, model.log_prior, model.classes)
    return ClassifiedDoc(id, model.classes[best],
                         {c: float(v) for c, v in zip(model.classes, s)})


def classify_many(model: NbModel, docs: Sequence[DocVector], ids: Sequence[str]) -> list[ClassifiedDoc]:
    X = _doc_matrix(docs, len(model.vocab))
    S = np.asarray(X @ model.log_cond.T) + model.log_prior
    out = []
    for i, doc_id in enumerate(ids):
        best = _argmax(S[i], model.log_prior, model.classes)
        out.append(ClassifiedDoc(doc_id, model.classes[best],
                                 {c: float(v) for c, v in zip(model.classes, S[i])}))
    return out


@dataclass
class CvReport:
    k: int
    seed: int
    accuracy: float
    confusion: np.ndarray                 # rows true, columns predicted, CLASS_ORDER
    fold_accuracy: list[float]

    @property
    def n(self) -> int:
        return int(self.confusion.sum())


def cross_validate(docs: Sequence[LabeledDoc], k: int, seed: int) -> CvReport:
    """Unstratified seeded k-fold CV; pooled accuracy over all held-out docs.

    Each fold's model uses only the words present in its training part as
    vocabulary.
    """
    n = len(docs)
    if k < 2:
        raise DataError("k must be at least 2")
    if k > n:
        raise DataError(f"k={k} exceeds the number of documents ({n})")
    n_words = 1 + max((max(d.doc.counts, default=-1) for d in docs), default=-1)
    X = _doc_matrix([d.doc for d in docs], n_words)
    y = _codes(d.label for d in docs)
    perm = np.random.default_rng(seed).permutation(n)
    confusion = np.zeros((3, 3), dtype=int)
    fold_acc = []
    for test_idx in np.array_split(perm, k):
        train_mask = np.ones(n, dtype=bool)
        train_mask[test_idx] = False
        Xtr = X[train_mask]
        seen = np.flatnonzero(np.asarray(Xtr.sum(axis=0)).ravel() > 0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            classes, log_prior, log_cond, _ = _fit(Xtr[:, seen], y[train_mask])
        S = np.asarray(X[test_idx][:, seen] @ log_cond.T) + log_prior
        correct = 0
        for row, i in zip(S, test_idx):
            pred = CLASS_ORDER.index(classes[_argmax(row, log_prior, classes)])
            confusion[y[i], pred] += 1
            correct += pred == y[i]
        fold_acc.append(correct / len(test_idx))
    return CvReport(k, seed, float(np.trace(confusion) / n), confusion, fold_acc)


def discriminative_words(model: NbModel, a: SentimentClass, b: SentimentClass,
                         n: int) -> list[tuple[str, float]]:
    """Top ``n`` words by P(w|a) - P(w|b), descending, ties by vocabulary index."""
    ia, ib = model.classes.index(a), model.classes.index(b)
    diff = np.exp(model.log_cond[ia]) - np.exp(model.log_cond[ib])
    order = np.argsort(-diff, kind="stable")[:min(n, len(model.vocab))]
    return [(model.vocab.word_of(int(i)), float(diff[i])) for i in order]


# ----------------------------------------------------------- persistence

_MAGIC = b"MSNB"
_VERSION = 1


def save_model(model: NbModel, fh, metadata: dict | None = None) -> None:
    header = {
        "version": _VERSION,
        "classes": [c.value for c in model.classes],
        "class_docs": [int(x) for x in model.class_docs] if model.class_docs is not None else None,
        "vocab": list(model.vocab.words),
        "metadata": metadata or {},
    }
    blob = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
    fh.write(_MAGIC)
    fh.write(struct.pack("<HQ", _VERSION, len(blob)))
    fh.write(blob)
    fh.write(np.ascontiguousarray(model.log_prior, dtype="<f8").tobytes())
    fh.write(np.ascontiguousarray(model.log_cond, dtype="<f8").tobytes())


def load_model(fh) -> NbModel:
    if fh.read(4) != _MAGIC:
        raise DataError("not a model file")
    version, length = struct.unpack("<HQ", fh.read(10))
    if version != _VERSION:
        raise DataError(f"unsupported model version {version}")
    header = json.loads(fh.read(length).decode("utf-8"))
    classes = tuple(SentimentClass(c) for c in header["classes"])
    C, V = len(classes), len(header["vocab"])
    log_prior = np.frombuffer(fh.read(8 * C), dtype="<f8").astype(float)
    log_cond = np.frombuffer(fh.read(8 * C * V), dtype="<f8").astype(float).reshape(C, V)
    class_docs = header.get("class_docs")
    return NbModel(classes, log_prior, log_cond, Vocabulary(header["vocab"]),
                   None if class_docs is None else np.array(class_docs, dtype=float))


def model_metadata(fh) -> dict:
    fh.read(4)
    _, length = struct.unpack("<HQ", fh.read(10))
    return json.loads(fh.read(length).decode("utf-8"))["metadata"]
