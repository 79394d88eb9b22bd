"""Clustering audit: do the most gender-aligned words cluster by gender?

Every non-excluded word is scored by its dot product with a male anchor
minus a female anchor; the k most male- and k most female-aligned words are
clustered with deterministic 2-means, and the fraction of words whose
cluster agrees with their score-side label is folded to max(a, 1 - a).
Values near 1 mean the biased words still separate cleanly; values near
0.5 mean the grouping is gone.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ValidationError
from .store import EmbeddingSet, unit_rows

MAX_ITERATIONS = 300


@dataclass(frozen=True)
class SelectedWord:
    token: str
    score: float
    truth: int
    predicted: int


@dataclass(frozen=True)
class ClusterAuditResult:
    accuracy: float
    raw_accuracy: float
    k: int
    male_anchor: str
    female_anchor: str
    selected: tuple[SelectedWord, ...]
    iterations: int
    normalized: bool

    def to_report(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "raw_accuracy": self.raw_accuracy,
            "k": self.k,
            "anchors": [self.male_anchor, self.female_anchor],
            "normalized": self.normalized,
            "selected": [
                {
                    "token": s.token,
                    "score": s.score,
                    "truth": s.truth,
                    "predicted": s.predicted,
                }
                for s in self.selected
            ],
        }


def gender_direction_scores(
    embeddings: EmbeddingSet,
    male_anchor: str,
    female_anchor: str,
    exclusions: Iterable[str] = (),
    normalized: bool = False,
) -> dict[str, float]:
    """Dot-product alignment of every word with the anchor difference.

    score(w) = w . v(male_anchor) - w . v(female_anchor) over raw stored
    vectors (or unit-normalized copies when `normalized`). Anchors and
    excluded tokens are not scored.
    """
    for anchor in (male_anchor, female_anchor):
        if anchor not in embeddings:
            raise ValidationError(f"anchor token {anchor!r} not in vocabulary")
    matrix = unit_rows(embeddings.matrix) if normalized else embeddings.matrix
    direction = (
        matrix[embeddings.index(male_anchor)]
        - matrix[embeddings.index(female_anchor)]
    )
    raw = matrix @ direction
    skip = set(exclusions) | {male_anchor, female_anchor}
    return {
        word: float(raw[i])
        for i, word in enumerate(embeddings.words)
        if word not in skip
    }


def top_biased(
    scores: Mapping[str, float], k: int
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """The k highest- and k lowest-scoring tokens; ties break by token order."""
    if k < 1:
        raise ValidationError("k must be positive")
    if len(scores) < 2 * k:
        raise ValidationError(
            f"need at least {2 * k} scored words, have {len(scores)}"
        )
    male_side = sorted(scores, key=lambda w: (-scores[w], w))[:k]
    female_side = sorted(scores, key=lambda w: (scores[w], w))[:k]
    return tuple(male_side), tuple(female_side)


def _pairwise_sq_dists(matrix: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", matrix, matrix)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (matrix @ matrix.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def kmeans2(vectors: np.ndarray) -> tuple[np.ndarray, int]:
    """Deterministic 2-means.

    Initial centroids are the two points at maximal Euclidean distance
    (ties resolved by the lowest index pair in row-major order); Lloyd
    iterations run to an assignment fixpoint or MAX_ITERATIONS, reassigning
    the farthest point whenever a cluster empties.

    Returns:
        (labels in {0, 1} aligned with the input rows, iteration count)
    """
    matrix = np.asarray(vectors, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise ValidationError("kmeans2 needs at least two vectors")
    d2 = _pairwise_sq_dists(matrix)
    if float(d2.max()) == 0.0:
        raise ValidationError("kmeans2 input vectors are all identical")
    i, j = np.unravel_index(int(np.argmax(d2)), d2.shape)
    centroids = np.stack([matrix[i], matrix[j]])

    labels = np.full(matrix.shape[0], -1, dtype=np.intp)
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        dists = ((matrix[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(dists, axis=1)
        for cluster in (0, 1):
            if not np.any(new_labels == cluster):
                member_dists = dists[np.arange(len(new_labels)), new_labels]
                farthest = int(np.argmax(member_dists))
                new_labels[farthest] = cluster
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for cluster in (0, 1):
            centroids[cluster] = matrix[labels == cluster].mean(axis=0)
    return labels, iterations


def run_cluster_audit(
    embeddings: EmbeddingSet,
    male_anchor: str = "man",
    female_anchor: str = "vrouw",
    k: int = 500,
    exclusions: Iterable[str] = (),
    normalized: bool = False,
    select_from: EmbeddingSet | None = None,
) -> ClusterAuditResult:
    """Score, select top-k per pole, cluster, and fold the agreement rate.

    When `select_from` is given, scores and word selection come from that
    set while clustering runs on `embeddings` — this audits whether the
    words most aligned in the original space still cluster after a
    mitigation pass.
    """
    scoring_set = select_from if select_from is not None else embeddings
    scores = gender_direction_scores(
        scoring_set, male_anchor, female_anchor, exclusions, normalized
    )
    male_top, female_top = top_biased(scores, k)

    truth_by_token = {w: 0 for w in male_top}
    truth_by_token.update({w: 1 for w in female_top})
    ordered = sorted(truth_by_token)
    missing = [w for w in ordered if w not in embeddings]
    if missing:
        raise ValidationError(
            f"selected words missing from the audited set: {missing[:5]}"
        )
    matrix = np.asarray([embeddings.vector(w) for w in ordered])
    if normalized:
        matrix = unit_rows(matrix)
    labels, iterations = kmeans2(matrix)

    truths = np.array([truth_by_token[w] for w in ordered])
    raw_accuracy = float(np.mean(truths == labels))
    accuracy = max(raw_accuracy, 1.0 - raw_accuracy)
    selected = tuple(
        SelectedWord(
            token=w, score=scores[w], truth=int(t), predicted=int(p)
        )
        for w, t, p in zip(ordered, truths, labels)
    )
    return ClusterAuditResult(
        accuracy=accuracy,
        raw_accuracy=raw_accuracy,
        k=k,
        male_anchor=male_anchor,
        female_anchor=female_anchor,
        selected=selected,
        iterations=iterations,
        normalized=normalized,
    )


def write_plot_data(
    result: ClusterAuditResult, embeddings: EmbeddingSet, path: str | Path
) -> None:
    """TSV of token, score, 2-D PCA coordinates, truth, predicted labels."""
    matrix = np.asarray([embeddings.vector(s.token) for s in result.selected])
    centered = matrix - matrix.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    coords = centered @ vt[:2].T
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("token\tscore\tpca_x\tpca_y\ttruth\tpredicted\n")
        for s, (x, y) in zip(result.selected, coords):
            handle.write(
                f"{s.token}\t{s.score:.9g}\t{x:.9g}\t{y:.9g}"
                f"\t{s.truth}\t{s.predicted}\n"
            )
