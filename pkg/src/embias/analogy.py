"""Relation-identification (analogy) evaluation.

Question files use the classic layout: ": <section-name>" lines start a
section, followed by one "a b c expected" question per line. A question is
answered by the vocabulary token (query tokens excluded) whose vector has
the highest cosine similarity to v(b) - v(a) + v(c).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateVectorError, FormatError, ValidationError
from .store import EmbeddingSet

OFFSET_FORMULAS = ("b-a+c", "a-b+c")


@dataclass(frozen=True)
class AnalogyQuestion:
    a: str
    b: str
    c: str
    expected: str


@dataclass(frozen=True)
class AnalogyDataset:
    sections: dict[str, tuple[AnalogyQuestion, ...]]

    def __post_init__(self):
        if not self.sections:
            raise ValidationError("analogy dataset has no sections")

    def __len__(self) -> int:
        return sum(len(qs) for qs in self.sections.values())


@dataclass(frozen=True)
class SectionScore:
    accuracy: float | None
    attempted: int
    skipped: int


@dataclass(frozen=True)
class AnalogyReport:
    overall: float | None
    attempted: int
    skipped: int
    sections: dict[str, SectionScore]

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "attempted": self.attempted,
            "skipped": self.skipped,
            "sections": {
                name: {"accuracy": score.accuracy, "n": score.attempted}
                for name, score in self.sections.items()
            },
        }


def load_analogy_dataset(path: str | Path) -> AnalogyDataset:
    path = Path(path)
    sections: dict[str, list[AnalogyQuestion]] = {}
    current: str | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith(":"):
                current = line[1:].strip()
                if not current:
                    raise FormatError("empty section name", lineno)
                sections.setdefault(current, [])
                continue
            if current is None:
                raise FormatError("question before any section header", lineno)
            tokens = line.split()
            if len(tokens) != 4:
                raise FormatError(
                    f"expected 4 tokens per question, got {len(tokens)}", lineno
                )
            sections[current].append(AnalogyQuestion(*tokens))
    return AnalogyDataset(
        sections={name: tuple(qs) for name, qs in sections.items()}
    )


def solve_analogy(
    embeddings: EmbeddingSet,
    a: str,
    b: str,
    c: str,
    offset_formula: str = "b-a+c",
) -> str:
    """Best completion of "a is to b as c is to ?" by cosine to the offset.

    Query tokens are excluded from the candidates; exact score ties break
    toward the byte-wise smallest token.
    """
    if offset_formula not in OFFSET_FORMULAS:
        raise ValidationError(f"unknown offset formula {offset_formula!r}")
    for token in (a, b, c):
        if token not in embeddings:
            raise KeyError(f"query token {token!r} not in vocabulary")
    va, vb, vc = embeddings.vector(a), embeddings.vector(b), embeddings.vector(c)
    target = vb - va + vc if offset_formula == "b-a+c" else va - vb + vc
    target_norm = float(np.linalg.norm(target))
    if target_norm == 0.0:
        raise DegenerateVectorError("analogy offset vector has zero norm")

    norms = np.linalg.norm(embeddings.matrix, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = (embeddings.matrix @ target) / (norms * target_norm)
    scores[norms == 0.0] = -np.inf
    for token in (a, b, c):
        scores[embeddings.index(token)] = -np.inf
    best = float(np.max(scores))
    if best == -np.inf:
        raise ValidationError("no candidate token available")
    candidates = [embeddings.words[i] for i in np.flatnonzero(scores == best)]
    return min(candidates)


def run_analogy_task(
    embeddings: EmbeddingSet,
    dataset: AnalogyDataset,
    offset_formula: str = "b-a+c",
) -> AnalogyReport:
    """Per-section and overall accuracy; OOV questions are skipped and counted."""
    section_scores: dict[str, SectionScore] = {}
    total_correct = total_attempted = total_skipped = 0
    for name, questions in dataset.sections.items():
        correct = attempted = skipped = 0
        for q in questions:
            if any(t not in embeddings for t in (q.a, q.b, q.c, q.expected)):
                skipped += 1
                continue
            attempted += 1
            if solve_analogy(embeddings, q.a, q.b, q.c, offset_formula) == q.expected:
                correct += 1
        section_scores[name] = SectionScore(
            accuracy=correct / attempted if attempted else None,
            attempted=attempted,
            skipped=skipped,
        )
        total_correct += correct
        total_attempted += attempted
        total_skipped += skipped
    return AnalogyReport(
        overall=total_correct / total_attempted if total_attempted else None,
        attempted=total_attempted,
        skipped=total_skipped,
        sections=section_scores,
    )
