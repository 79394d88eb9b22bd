"""Sentence-level bias subspace fitting and projection removal.

Works on externally produced sentence vectors. The file contracts:

  * vector file: first line "N d", then one "<id> <c1> ... <cd>" row per
    sentence, single-space separators, UTF-8, LF endings.
  * manifest TSV: header "id\tpair_id\tgroup\ttext"; pair_id is "-" for
    unpaired sentences.

Unlike word-level hard debiasing there is no equalize step and vectors are
not re-normalized after the projection is subtracted (optional flag).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import FormatError, ValidationError
from .harddebias import BiasSubspace, fit_pair_subspace

MANIFEST_HEADER = ("id", "pair_id", "group", "text")


@dataclass(frozen=True)
class SentenceMeta:
    text: str
    group: str
    pair_id: str | None


@dataclass(frozen=True)
class SentenceVectorSet:
    """Sentence vectors keyed by id, with optional text/pair metadata."""

    ids: tuple[str, ...]
    vectors: np.ndarray
    manifest: Mapping[str, SentenceMeta] | None = None

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValidationError("vectors must form an (N, d) matrix")
        if len(self.ids) != vectors.shape[0]:
            raise ValidationError(
                f"{len(self.ids)} ids but {vectors.shape[0]} vector rows"
            )
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("sentence ids must be unique")
        if not np.all(np.isfinite(vectors)):
            raise ValidationError("vectors contain non-finite components")
        if self.manifest is not None:
            counts: dict[str, int] = {}
            for meta in self.manifest.values():
                if meta.pair_id is not None:
                    counts[meta.pair_id] = counts.get(meta.pair_id, 0) + 1
            bad = sorted(pid for pid, n in counts.items() if n != 2)
            if bad:
                raise ValidationError(
                    f"pair ids must occur exactly twice; offenders: {bad[:5]}"
                )
        vectors.setflags(write=False)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "vectors", vectors)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def vector(self, sentence_id: str) -> np.ndarray:
        try:
            return self.vectors[self.ids.index(sentence_id)]
        except ValueError:
            raise KeyError(f"unknown sentence id {sentence_id!r}") from None

    def text_vectors(self) -> dict[str, np.ndarray]:
        """Vectors keyed by sentence text (requires a manifest)."""
        if self.manifest is None:
            raise ValidationError("text lookup requires a manifest")
        out: dict[str, np.ndarray] = {}
        for i, sentence_id in enumerate(self.ids):
            meta = self.manifest.get(sentence_id)
            if meta is None:
                raise ValidationError(f"id {sentence_id!r} missing from manifest")
            out[meta.text] = self.vectors[i]
        return out


def load_sentence_vectors(
    path: str | Path, manifest: Mapping[str, SentenceMeta] | None = None
) -> SentenceVectorSet:
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        header = handle.readline()
        parts = header.split()
        if len(parts) != 2:
            raise FormatError(f"malformed header {header.strip()!r}", 1)
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"malformed header {header.strip()!r}", 1) from None
        ids: list[str] = []
        rows: list[list[float]] = []
        lineno = 1
        for line in handle:
            lineno += 1
            line = line.rstrip("\n").rstrip(" ")
            if not line:
                continue
            fields = line.split(" ")
            if len(fields) - 1 != dim:
                raise FormatError(
                    f"row length {len(fields) - 1} != declared dim {dim}", lineno
                )
            values = []
            for raw in fields[1:]:
                try:
                    value = float(raw)
                except ValueError:
                    raise FormatError(f"unparseable component {raw!r}", lineno) from None
                if not math.isfinite(value):
                    raise FormatError(f"non-finite component {raw!r}", lineno)
                values.append(value)
            ids.append(fields[0])
            rows.append(values)
    if len(ids) != count:
        raise FormatError(f"header declares {count} rows, found {len(ids)}")
    return SentenceVectorSet(
        tuple(ids), np.array(rows, dtype=np.float64), manifest
    )


def save_sentence_vectors(svs: SentenceVectorSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{len(svs)} {svs.dim}\n")
        for sentence_id, row in zip(svs.ids, svs.vectors):
            components = " ".join(f"{value:.9g}" for value in row)
            handle.write(f"{sentence_id} {components}\n")


def load_manifest(path: str | Path) -> dict[str, SentenceMeta]:
    """Ordered id -> metadata map from a manifest TSV."""
    path = Path(path)
    manifest: dict[str, SentenceMeta] = {}
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
        if tuple(header.split("\t")) != MANIFEST_HEADER:
            raise FormatError(f"manifest header must be {MANIFEST_HEADER}", 1)
        for lineno, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise FormatError(f"expected 4 tab-separated fields", lineno)
            sentence_id, pair_id, group, text = fields
            if sentence_id in manifest:
                raise FormatError(f"duplicate id {sentence_id!r}", lineno)
            manifest[sentence_id] = SentenceMeta(
                text=text, group=group, pair_id=None if pair_id == "-" else pair_id
            )
    return manifest


def save_manifest(manifest: Mapping[str, SentenceMeta], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\t".join(MANIFEST_HEADER) + "\n")
        for sentence_id, meta in manifest.items():
            pair = meta.pair_id if meta.pair_id is not None else "-"
            handle.write(f"{sentence_id}\t{pair}\t{meta.group}\t{meta.text}\n")


def fit_sentence_subspace(svs: SentenceVectorSet, k: int = 1) -> BiasSubspace:
    """Principal directions of pair-centered sentence vectors.

    Pairs are the manifest's pair_id groups; each member is centered by its
    pair mean. The sign convention follows the first pair (member with the
    lower id minus the other).
    """
    if svs.manifest is None:
        raise ValidationError("fitting requires a manifest with pair ids")
    groups: dict[str, list[str]] = {}
    for sentence_id in svs.ids:
        meta = svs.manifest.get(sentence_id)
        if meta is not None and meta.pair_id is not None:
            groups.setdefault(meta.pair_id, []).append(sentence_id)
    complete = [sorted(members) for members in groups.values() if len(members) == 2]
    if not complete:
        raise ValidationError("no complete sentence pair to fit from")
    index = {sid: i for i, sid in enumerate(svs.ids)}
    first = np.asarray([svs.vectors[index[a]] for a, _ in complete])
    second = np.asarray([svs.vectors[index[b]] for _, b in complete])
    return fit_pair_subspace(first, second, k)


def debias_vector(
    v: np.ndarray, subspace: BiasSubspace, renormalize: bool = False
) -> np.ndarray:
    """Subtract the subspace component; optionally rescale to unit length."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (subspace.dim,):
        raise ValidationError(
            f"vector has shape {v.shape}, subspace expects ({subspace.dim},)"
        )
    out = v - subspace.basis.T @ (subspace.basis @ v)
    if renormalize:
        norm = np.linalg.norm(out)
        if norm > 0.0:
            out = out / norm
    return out


def debias_batch(
    svs: SentenceVectorSet, subspace: BiasSubspace, renormalize: bool = False
) -> SentenceVectorSet:
    """debias_vector over every row; ids and manifest preserved."""
    if svs.dim != subspace.dim:
        raise ValidationError(
            f"vectors have dim {svs.dim}, subspace expects {subspace.dim}"
        )
    out = svs.vectors - svs.vectors @ subspace.basis.T @ subspace.basis
    if renormalize:
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        out = np.where(norms > 0.0, out / np.where(norms == 0.0, 1.0, norms), out)
    return SentenceVectorSet(svs.ids, out, svs.manifest)
