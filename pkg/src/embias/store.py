"""Word-embedding storage: loading, saving, normalization, and the cosine kernel.

All arithmetic is 64-bit. An :class:`EmbeddingSet` is immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateVectorError, FormatError, ValidationError

FORMATS = ("word2vec-text", "tsv")

# 9 significant digits round-trip 32-bit-precision sources without bloat.
_FLOAT_FMT = "{:.9g}"


@dataclass(frozen=True)
class EmbeddingSet:
    """An ordered vocabulary with one float64 row vector per token.

    Attributes:
        words: Unique NFC-normalized tokens, one per matrix row.
        matrix: Read-only (len(words), dim) float64 array.
        normalized: True when every row is unit length (within 1e-6).
    """

    words: tuple[str, ...]
    matrix: np.ndarray
    normalized: bool = False
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValidationError(f"matrix must be 2-D, got shape {matrix.shape}")
        if len(self.words) == 0:
            raise ValidationError("embedding set must contain at least one word")
        if matrix.shape[0] != len(self.words):
            raise ValidationError(
                f"{len(self.words)} words but {matrix.shape[0]} matrix rows"
            )
        if matrix.shape[1] < 1:
            raise ValidationError("vector dimension must be positive")
        if not np.all(np.isfinite(matrix)):
            raise ValidationError("matrix contains non-finite components")
        index: dict[str, int] = {}
        for i, word in enumerate(self.words):
            if word in index:
                raise ValidationError(f"duplicate token {word!r}")
            index[word] = i
        if self.normalized:
            norms = np.linalg.norm(matrix, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-6):
                bad = self.words[int(np.argmax(np.abs(norms - 1.0)))]
                raise ValidationError(
                    f"normalized flag set but row for {bad!r} is not unit length"
                )
        matrix.setflags(write=False)
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "_index", index)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise KeyError(f"token {token!r} not in vocabulary") from None

    def vector(self, token: str) -> np.ndarray:
        """Read-only vector for `token`; KeyError when absent."""
        return self.matrix[self.index(token)]

    def with_matrix(self, matrix: np.ndarray, normalized: bool) -> "EmbeddingSet":
        """Same vocabulary, new row data."""
        return EmbeddingSet(self.words, matrix, normalized)


def _nfc(token: str) -> str:
    return unicodedata.normalize("NFC", token)


def _parse_components(fields: list[str], lineno: int) -> list[float]:
    values = []
    for raw in fields:
        try:
            value = float(raw)
        except ValueError:
            raise FormatError(f"unparseable component {raw!r}", lineno) from None
        if not math.isfinite(value):
            raise FormatError(f"non-finite component {raw!r}", lineno)
        values.append(value)
    return values


def load_embeddings(path: str | Path, fmt: str = "word2vec-text") -> EmbeddingSet:
    """Load an embedding set from a text file.

    Args:
        path: Input file.
        fmt: "word2vec-text" (header "<count> <dim>", space-separated) or
            "tsv" (no header, tab-separated, dim inferred from the first row).

    Raises:
        FormatError: malformed header, row length mismatch, non-finite or
            unparseable component, duplicate token; all with line numbers.
    """
    if fmt not in FORMATS:
        raise ValidationError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        if fmt == "word2vec-text":
            return _load_word2vec_text(handle)
        return _load_tsv(handle)


def _load_word2vec_text(handle) -> EmbeddingSet:
    header = handle.readline()
    if not header:
        raise FormatError("empty file; expected '<count> <dim>' header", 1)
    parts = header.split()
    if len(parts) != 2:
        raise FormatError(f"malformed header {header.strip()!r}", 1)
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise FormatError(f"malformed header {header.strip()!r}", 1) from None
    if count < 1 or dim < 1:
        raise FormatError(f"header declares count={count}, dim={dim}", 1)

    words: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    lineno = 1
    for line in handle:
        lineno += 1
        line = line.rstrip("\n").rstrip(" ")
        if not line:
            continue
        fields = line.split(" ")
        token = _nfc(fields[0])
        if len(fields) - 1 != dim:
            raise FormatError(
                f"row length {len(fields) - 1} != declared dim {dim}", lineno
            )
        if token in seen:
            raise FormatError(f"duplicate token {token!r}", lineno)
        seen.add(token)
        words.append(token)
        rows.append(_parse_components(fields[1:], lineno))
    if len(words) != count:
        raise FormatError(f"header declares {count} rows, found {len(words)}")
    return EmbeddingSet(tuple(words), np.array(rows, dtype=np.float64))


def _load_tsv(handle) -> EmbeddingSet:
    words: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    dim: int | None = None
    for lineno, line in enumerate(handle, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise FormatError("expected '<token>\\t<c1>\\t...' row", lineno)
        token = _nfc(fields[0])
        if dim is None:
            dim = len(fields) - 1
        elif len(fields) - 1 != dim:
            raise FormatError(f"row length {len(fields) - 1} != dim {dim}", lineno)
        if token in seen:
            raise FormatError(f"duplicate token {token!r}", lineno)
        seen.add(token)
        words.append(token)
        rows.append(_parse_components(fields[1:], lineno))
    if not words:
        raise FormatError("empty file")
    return EmbeddingSet(tuple(words), np.array(rows, dtype=np.float64))


def save_embeddings(embeddings: EmbeddingSet, path: str | Path) -> None:
    """Write word2vec text format: LF endings, UTF-8, 9 significant digits."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{len(embeddings)} {embeddings.dim}\n")
        for word, row in zip(embeddings.words, embeddings.matrix):
            components = " ".join(_FLOAT_FMT.format(value) for value in row)
            handle.write(f"{word} {components}\n")


def cosine(
    u: np.ndarray,
    v: np.ndarray,
    u_name: str | None = None,
    v_name: str | None = None,
) -> float:
    """Cosine similarity clamped to [-1, 1].

    Raises:
        DegenerateVectorError: either input has zero norm; names the token
            when the caller supplied one.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    norm_u = float(np.linalg.norm(u))
    norm_v = float(np.linalg.norm(v))
    if norm_u == 0.0:
        raise DegenerateVectorError("zero-norm vector in cosine", u_name)
    if norm_v == 0.0:
        raise DegenerateVectorError("zero-norm vector in cosine", v_name)
    value = float(np.dot(u, v)) / (norm_u * norm_v)
    return min(1.0, max(-1.0, value))


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Rows scaled to unit length; rows must all have positive norm."""
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateVectorError("zero-norm row cannot be normalized")
    return matrix / norms


def normalize_all(embeddings: EmbeddingSet) -> EmbeddingSet:
    """Unit-normalize every row; names the offending token on zero norm."""
    norms = np.linalg.norm(embeddings.matrix, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateVectorError(
            "zero-norm row cannot be normalized", embeddings.words[int(zero[0])]
        )
    return embeddings.with_matrix(
        embeddings.matrix / norms[:, None], normalized=True
    )
