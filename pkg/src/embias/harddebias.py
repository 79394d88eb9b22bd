"""Bias-subspace fitting and hard debiasing of word embeddings.

The subspace is the span of the leading principal directions of
pair-centered definitional vectors. Neutralizing removes a word's
component in that span and re-normalizes; equalizing re-centers each
gendered pair symmetrically about the span so both members keep unit norm
and equal distance to every neutralized word.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError, ValidationError
from .resources import DebiasLists
from .store import EmbeddingSet, normalize_all

SIGN_CONVENTION = "male-minus-female"

_ORTHONORMAL_TOL = 1e-8
_ZERO_MATRIX_TOL = 1e-15
_EQUALIZE_TOL = 1e-12


@dataclass(frozen=True)
class BiasSubspace:
    """k orthonormal direction vectors plus fit metadata.

    explained_variance holds the fraction of total pair-centered variance
    captured per direction, non-increasing. pair_means is None for
    subspaces loaded from disk.
    """

    basis: np.ndarray
    explained_variance: np.ndarray
    pair_means: np.ndarray | None = None

    def __post_init__(self):
        basis = np.array(self.basis, dtype=np.float64)
        ev = np.array(self.explained_variance, dtype=np.float64)
        if basis.ndim != 2 or basis.shape[0] < 1:
            raise ValidationError("basis must be a non-empty (k, dim) matrix")
        if basis.shape[0] > basis.shape[1]:
            raise ValidationError("subspace rank k cannot exceed the dimension")
        gram = basis @ basis.T
        if np.max(np.abs(gram - np.eye(basis.shape[0]))) > _ORTHONORMAL_TOL:
            raise ValidationError("basis vectors are not orthonormal")
        if ev.shape != (basis.shape[0],):
            raise ValidationError("explained_variance must have one entry per basis vector")
        if np.any(ev < 0.0) or np.any(np.diff(ev) > 0.0):
            raise ValidationError("explained_variance must be non-negative and non-increasing")
        basis.setflags(write=False)
        ev.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "explained_variance", ev)
        if self.pair_means is not None:
            means = np.array(self.pair_means, dtype=np.float64)
            means.setflags(write=False)
            object.__setattr__(self, "pair_means", means)

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class DebiasReport:
    dropped_definitional: tuple[tuple[str, str], ...]
    dropped_equalize: tuple[tuple[str, str], ...]
    skipped_pairs: tuple[tuple[str, str], ...]
    skipped_words: tuple[str, ...]
    explained_variance: tuple[float, ...]
    renormalized_input: bool

    def to_dict(self) -> dict:
        return {
            "dropped_definitional": [list(p) for p in self.dropped_definitional],
            "dropped_equalize": [list(p) for p in self.dropped_equalize],
            "skipped_pairs": [list(p) for p in self.skipped_pairs],
            "skipped_words": list(self.skipped_words),
            "explained_variance": list(self.explained_variance),
            "renormalized_input": self.renormalized_input,
        }


def split_oov_pairs(
    embeddings: EmbeddingSet, pairs: Sequence[tuple[str, str]]
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    """Partition pairs into (kept, dropped); a pair drops whole on any OOV member."""
    kept, dropped = [], []
    for pair in pairs:
        if pair[0] in embeddings and pair[1] in embeddings:
            kept.append(tuple(pair))
        else:
            dropped.append(tuple(pair))
    return kept, dropped


def fit_pair_subspace(
    first: np.ndarray, second: np.ndarray, k: int
) -> BiasSubspace:
    """Leading principal directions of rows centered by their pair means.

    `first` and `second` are (n_pairs, dim) matrices of pair members. The
    sign of each direction is fixed so its dot product with
    (first[0] - second[0]) is non-negative, falling back to making the
    first nonzero component positive.
    """
    first = np.asarray(first, dtype=np.float64)
    second = np.asarray(second, dtype=np.float64)
    if first.shape != second.shape or first.ndim != 2:
        raise ValidationError("pair member matrices must share shape (n_pairs, dim)")
    dim = first.shape[1]
    if not 1 <= k <= dim:
        raise ValidationError(f"k must be in [1, {dim}], got {k}")
    means = (first + second) / 2.0
    centered = np.concatenate([first - means, second - means])
    if np.max(np.abs(centered)) <= _ZERO_MATRIX_TOL:
        raise ValidationError("all pairs are identical; centered matrix is zero")
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    basis = vt[:k].copy()
    reference = first[0] - second[0]
    for j in range(k):
        alignment = float(basis[j] @ reference)
        if alignment < 0.0:
            basis[j] = -basis[j]
        elif alignment == 0.0:
            nonzero = np.flatnonzero(basis[j])
            if nonzero.size and basis[j][nonzero[0]] < 0.0:
                basis[j] = -basis[j]
    variance = singular**2
    total = float(variance.sum())
    ratios = variance[:k] / total if total > 0.0 else np.zeros(k)
    return BiasSubspace(basis=basis, explained_variance=ratios, pair_means=means)


def fit_bias_subspace(
    embeddings: EmbeddingSet, pairs: Sequence[tuple[str, str]], k: int = 1
) -> BiasSubspace:
    """Fit the bias subspace from definitional pairs of a unit-normalized set.

    Pairs with an out-of-vocabulary member are dropped with a warning; at
    least one pair must survive.
    """
    _require_normalized(embeddings)
    kept, dropped = split_oov_pairs(embeddings, pairs)
    if dropped:
        warnings.warn(f"dropping pairs with out-of-vocabulary members: {dropped}")
    if not kept:
        raise ValidationError("no definitional pair survived vocabulary filtering")
    first = np.asarray([embeddings.vector(a) for a, _ in kept])
    second = np.asarray([embeddings.vector(b) for _, b in kept])
    return fit_pair_subspace(first, second, k)


def project_onto(v: np.ndarray, subspace: BiasSubspace) -> np.ndarray:
    """Component of v inside the subspace: sum_j (v . b_j) b_j."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (subspace.dim,):
        raise ValidationError(
            f"vector has dim {v.shape}, subspace expects ({subspace.dim},)"
        )
    return subspace.basis.T @ (subspace.basis @ v)


def _require_normalized(embeddings: EmbeddingSet) -> None:
    if not embeddings.normalized:
        raise ValidationError("operation requires a unit-normalized embedding set")


def neutralize(
    embeddings: EmbeddingSet,
    subspace: BiasSubspace,
    gender_specific: Iterable[str],
) -> tuple[EmbeddingSet, list[str]]:
    """Remove the subspace component from every non-gender-specific word.

    Words whose residual is the zero vector (they lie entirely inside the
    subspace) are skipped with a warning and returned in the skip list.
    """
    _require_normalized(embeddings)
    protected = set(gender_specific)
    matrix = np.array(embeddings.matrix)
    inside = matrix @ subspace.basis.T @ subspace.basis
    residual = matrix - inside
    norms = np.linalg.norm(residual, axis=1)
    skipped: list[str] = []
    for i, word in enumerate(embeddings.words):
        if word in protected:
            continue
        if norms[i] == 0.0:
            skipped.append(word)
            continue
        matrix[i] = residual[i] / norms[i]
    if skipped:
        warnings.warn(
            f"{len(skipped)} word(s) lie entirely inside the bias subspace "
            f"and were left untouched: {skipped[:5]}"
        )
    return embeddings.with_matrix(matrix, normalized=True), skipped


def equalize(
    embeddings: EmbeddingSet,
    subspace: BiasSubspace,
    pairs: Sequence[tuple[str, str]],
) -> tuple[EmbeddingSet, list[tuple[str, str]], list[tuple[str, str]]]:
    """Re-center each pair symmetrically about the subspace.

    Each member becomes nu + sqrt(1 - ||nu||^2) * u, where nu is the pair
    mean with its subspace component removed and u is the member's own
    centered in-subspace direction; members end up unit-norm with opposite
    subspace components of equal magnitude.

    Callers are expected to pass unit rows (the closed form assumes them);
    the formula itself only clamps ||nu|| <= 1, so the gate is not enforced
    here and the output keeps the input's normalized flag.

    Returns:
        (new set, pairs skipped as indistinguishable inside the subspace,
        pairs dropped for out-of-vocabulary members)
    """
    kept, dropped = split_oov_pairs(embeddings, pairs)
    if dropped:
        warnings.warn(f"dropping equalize pairs with out-of-vocabulary members: {dropped}")
    matrix = np.array(embeddings.matrix)
    skipped: list[tuple[str, str]] = []
    for a, b in kept:
        ia, ib = embeddings.index(a), embeddings.index(b)
        mean = (matrix[ia] + matrix[ib]) / 2.0
        mean_inside = project_onto(mean, subspace)
        nu = mean - mean_inside
        scale = np.sqrt(max(0.0, 1.0 - float(nu @ nu)))
        degenerate = False
        new_rows = {}
        for idx in (ia, ib):
            inside = project_onto(matrix[idx], subspace)
            offset = inside - mean_inside
            norm = float(np.linalg.norm(offset))
            if norm < _EQUALIZE_TOL:
                degenerate = True
                break
            new_rows[idx] = nu + scale * offset / norm
        if degenerate:
            skipped.append((a, b))
            continue
        for idx, row in new_rows.items():
            matrix[idx] = row
    if skipped:
        warnings.warn(f"skipping equalize pairs indistinguishable inside the subspace: {skipped}")
    return embeddings.with_matrix(matrix, normalized=embeddings.normalized), skipped, dropped


def hard_debias(
    embeddings: EmbeddingSet, lists: DebiasLists, k: int = 1
) -> tuple[EmbeddingSet, BiasSubspace, DebiasReport]:
    """Full pipeline: normalize, fit, neutralize, equalize."""
    renormalized = not embeddings.normalized
    normalized = normalize_all(embeddings) if renormalized else embeddings
    kept_def, dropped_def = split_oov_pairs(normalized, lists.definitional_pairs)
    if not kept_def:
        raise ValidationError("no definitional pair survived vocabulary filtering")
    subspace = fit_bias_subspace(normalized, kept_def, k)
    neutralized, skipped_words = neutralize(
        normalized, subspace, lists.gender_specific
    )
    equalized, skipped_pairs, dropped_eq = equalize(
        neutralized, subspace, lists.equalize_pairs
    )
    report = DebiasReport(
        dropped_definitional=tuple(dropped_def),
        dropped_equalize=tuple(dropped_eq),
        skipped_pairs=tuple(skipped_pairs),
        skipped_words=tuple(skipped_words),
        explained_variance=tuple(float(v) for v in subspace.explained_variance),
        renormalized_input=renormalized,
    )
    return equalized, subspace, report


def save_subspace(subspace: BiasSubspace, path: str | Path) -> None:
    payload = {
        "k": subspace.k,
        "dim": subspace.dim,
        "basis": [[float(x) for x in row] for row in subspace.basis],
        "explained_variance": [float(v) for v in subspace.explained_variance],
        "sign_convention": SIGN_CONVENTION,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def load_subspace(path: str | Path) -> BiasSubspace:
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from None
    for key in ("k", "dim", "basis", "explained_variance"):
        if key not in raw:
            raise FormatError(f"{path}: missing key {key!r}")
    basis = np.asarray(raw["basis"], dtype=np.float64)
    if basis.shape != (raw["k"], raw["dim"]):
        raise FormatError(
            f"{path}: basis shape {basis.shape} does not match k={raw['k']}, dim={raw['dim']}"
        )
    return BiasSubspace(
        basis=basis, explained_variance=np.asarray(raw["explained_variance"])
    )
