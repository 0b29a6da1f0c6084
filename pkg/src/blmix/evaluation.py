"""Clustering quality (permutation accuracy, ARI) and topic quality (coherence, top terms)."""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .corpus import DocumentTermMatrix
from .errors import DomainError

__all__ = [
    "PermutationMatch",
    "ClusteringEval",
    "CoherenceReport",
    "encode_labels",
    "confusion_matrix",
    "permutation_accuracy",
    "adjusted_rand_index",
    "evaluate_clustering",
    "topic_coherence",
    "topic_order",
    "top_m_terms",
    "coherence_report",
]


class PermutationMatch(NamedTuple):
    accuracy: float
    best_permutation: dict  # predicted label -> true label


@dataclass
class ClusteringEval:
    accuracy: float
    ari: float
    best_permutation: dict

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "ari": self.ari,
            "best_permutation": {str(k): v for k, v in sorted(self.best_permutation.items())},
        }


@dataclass
class CoherenceReport:
    per_topic: list
    mean_coherence: float
    top_terms: list
    topic_order: list  # 1-based component index of each reported topic

    def to_dict(self) -> dict:
        return {
            "per_topic": self.per_topic,
            "mean_coherence": self.mean_coherence,
            "top_terms": self.top_terms,
            "topic_order": self.topic_order,
        }


def _label_key(label):
    text = str(label)
    return (0, int(text), "") if text.isdigit() else (1, 0, text)


def encode_labels(labels):
    """Map arbitrary labels to ``1..K``.

    Names are sorted, numerals by value, so labels ``"1".."K"`` keep their
    numbers. Returns ``(codes, names)`` with ``names[k - 1]`` the label coded ``k``.
    """
    labels = list(labels)
    names = sorted(set(labels), key=_label_key)
    index = {lab: k + 1 for k, lab in enumerate(names)}
    return np.asarray([index[lab] for lab in labels], dtype=np.int64), names


def _as_labels(labels, G, name):
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    if arr.size and (not np.issubdtype(arr.dtype, np.integer)):
        raise DomainError(f"{name} must be integers in 1..G")
    if arr.size and (arr.min() < 1 or arr.max() > G):
        bad = arr[(arr < 1) | (arr > G)][0]
        raise DomainError(f"{name} contains label {bad} outside 1..{G}")
    return arr.astype(np.int64)


def confusion_matrix(true_labels, pred_labels, G: int) -> np.ndarray:
    """``G x G`` counts with rows indexed by predicted and columns by true label."""
    t = _as_labels(true_labels, G, "true_labels")
    q = _as_labels(pred_labels, G, "pred_labels")
    if t.shape != q.shape:
        raise DomainError("true and predicted labels differ in length")
    C = np.zeros((G, G), dtype=np.int64)
    np.add.at(C, (q - 1, t - 1), 1)
    return C


def permutation_accuracy(true_labels, pred_labels, G: Optional[int] = None) -> PermutationMatch:
    """Accuracy under the best one-to-one relabeling of predicted clusters.

    Solved as a linear assignment problem on the confusion matrix. ``G``
    defaults to the largest label present; a smaller set of used labels on
    either side is handled by the square zero-padded matrix.
    """
    t = np.asarray(true_labels)
    q = np.asarray(pred_labels)
    if t.shape != q.shape:
        raise DomainError("true and predicted labels differ in length")
    if t.size == 0:
        raise DomainError("no labels to compare")
    if G is None:
        G = int(max(t.max(), q.max()))
    C = confusion_matrix(t, q, G)
    rows, cols = linear_sum_assignment(C, maximize=True)
    matched = int(C[rows, cols].sum())
    return PermutationMatch(
        accuracy=matched / t.size,
        best_permutation={int(r + 1): int(c + 1) for r, c in zip(rows, cols)},
    )


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1.0) / 2.0


def adjusted_rand_index(true_labels, pred_labels) -> float:
    """Hubert-Arabie adjusted Rand index from the contingency table."""
    t = np.asarray(true_labels)
    q = np.asarray(pred_labels)
    if t.shape != q.shape:
        raise DomainError("true and predicted labels differ in length")
    n = t.size
    if n < 2:
        raise DomainError("ARI needs at least two items")
    _, ti = np.unique(t, return_inverse=True)
    _, qi = np.unique(q, return_inverse=True)
    table = np.zeros((ti.max() + 1, qi.max() + 1), dtype=np.int64)
    np.add.at(table, (ti, qi), 1)
    index = _comb2(table).sum()
    row = _comb2(table.sum(axis=1)).sum()
    col = _comb2(table.sum(axis=0)).sum()
    expected = row * col / _comb2(n)
    maximum = 0.5 * (row + col)
    if maximum == expected:
        # both partitions trivial in the same way; agreement is perfect
        return 1.0
    return float((index - expected) / (maximum - expected))


def evaluate_clustering(true_labels, pred_labels, G: Optional[int] = None) -> ClusteringEval:
    match = permutation_accuracy(true_labels, pred_labels, G)
    return ClusteringEval(
        accuracy=match.accuracy,
        ari=adjusted_rand_index(true_labels, pred_labels),
        best_permutation=match.best_permutation,
    )


def topic_coherence(dtm: DocumentTermMatrix, top_terms) -> float:
    """Co-document coherence of an ordered list of top terms.

    ``sum_{m >= 2} sum_{s < m} log((D(v_m, v_s) + 1) / D(v_s))`` where ``D``
    counts documents containing every listed term at least once.
    """
    terms = list(top_terms)
    if len(terms) < 2:
        raise DomainError("coherence needs at least two terms")
    index = {t: j for j, t in enumerate(dtm.vocab)}
    missing = [t for t in terms if t not in index]
    if missing:
        raise DomainError(f"terms not in the vocabulary: {missing}")
    cols = [index[t] for t in terms]
    present = (dtm.counts[:, cols] > 0).astype(np.int64).tocsc()
    single = np.asarray(present.sum(axis=0)).ravel()
    joint = (present.T @ present).toarray()
    total = 0.0
    for m in range(1, len(terms)):
        for s in range(m):
            if single[s] == 0:
                raise DomainError(f"term {terms[s]!r} occurs in no document")
            total += np.log((joint[m, s] + 1.0) / single[s])
    return float(total)


def topic_order(weights) -> np.ndarray:
    """0-based component indices by descending weight (stable on ties)."""
    return np.argsort(-np.asarray(weights, dtype=np.float64), kind="stable")


def top_m_terms(topic_estimates, vocab, M: int, weights=None) -> list:
    """The ``M`` most probable terms of every topic.

    Topics come in descending order of ``weights`` when given; within a topic,
    equal probabilities keep vocabulary order.
    """
    P = np.asarray(topic_estimates, dtype=np.float64)
    if not 1 <= M <= P.shape[1]:
        raise DomainError(f"M must lie in 1..{P.shape[1]}")
    order = topic_order(weights) if weights is not None else np.arange(P.shape[0])
    out = []
    for g in order:
        top = np.argsort(-P[g], kind="stable")[:M]
        out.append([vocab[j] for j in top])
    return out


def coherence_report(dtm: DocumentTermMatrix, topic_estimates, weights, M: int = 10) -> CoherenceReport:
    order = topic_order(weights)
    terms = top_m_terms(topic_estimates, dtm.vocab, M, weights)
    per_topic = [topic_coherence(dtm, t) for t in terms]
    return CoherenceReport(
        per_topic=per_topic,
        mean_coherence=float(np.mean(per_topic)),
        top_terms=terms,
        topic_order=[int(g + 1) for g in order],
    )
