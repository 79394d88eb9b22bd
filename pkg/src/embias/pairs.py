"""Gendered sentence-pair generation from raw text.

A sentence qualifies when it contains exactly one occurrence of exactly
one token from the gendered pair list (matched whole-word, first letter
case-insensitively, the rest exactly) and no excluded token; the pair's
second sentence swaps that token for its opposite-gender partner,
preserving leading capitalization. Emitted sentence texts have internal
whitespace collapsed to single spaces so the one-token-difference
invariant and the tab-separated manifest stay well defined.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .errors import ValidationError
from .sentdebias import SentenceMeta, save_manifest

_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")
_EDGE_PUNCT = re.compile(r"^\W+|\W+$", re.UNICODE)


@dataclass(frozen=True)
class SentencePair:
    """An (original, swapped) sentence tuple differing in one token."""

    pair_id: str
    original: str
    swapped: str
    pivot: tuple[str, str]
    offset: int


@dataclass(frozen=True)
class PairGenStats:
    emitted: int
    sentences_seen: int
    skipped_multiple: int
    skipped_excluded: int
    skipped_too_long: int

    def to_dict(self) -> dict:
        return {
            "emitted": self.emitted,
            "sentences_seen": self.sentences_seen,
            "skipped_multiple": self.skipped_multiple,
            "skipped_excluded": self.skipped_excluded,
            "skipped_too_long": self.skipped_too_long,
        }


def _fold_first(token: str) -> str:
    return token[:1].lower() + token[1:] if token else token


def _match_capitalization(replacement: str, found: str) -> str:
    if found[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def build_swap_map(pairs: Sequence[tuple[str, str]]) -> dict[str, str]:
    """Bidirectional token swap map; the first mapping for a token wins."""
    if not pairs:
        raise ValidationError("pair list is empty")
    swap: dict[str, str] = {}
    for a, b in pairs:
        if a == b:
            raise ValidationError(f"pair {(a, b)!r} repeats the same token")
        swap.setdefault(_fold_first(a), b)
        swap.setdefault(_fold_first(b), a)
    return swap


def split_sentences(text: str) -> list[tuple[int, str]]:
    """(offset, sentence) chunks split after terminal punctuation."""
    sentences: list[tuple[int, str]] = []
    position = 0
    for match in _SENTENCE_END.finditer(text):
        chunk = text[position : match.start()]
        if chunk.strip():
            sentences.append((position, chunk))
        position = match.end()
    tail = text[position:]
    if tail.strip():
        sentences.append((position, tail))
    return sentences


def generate_pairs(
    corpus: str | TextIO | Path,
    pairs: Sequence[tuple[str, str]],
    excluded: Iterable[str] = ("zij", "ze"),
    max_tokens: int = 512,
    limit: int = 30_000,
) -> tuple[list[SentencePair], PairGenStats]:
    """Scan a corpus for swap-qualifying sentences, in corpus order.

    Raises:
        ValidationError: an excluded token appears in the pair list.
    """
    swap = build_swap_map(pairs)
    excluded_folded = {_fold_first(tok) for tok in excluded}
    clash = sorted(excluded_folded & set(swap))
    if clash:
        raise ValidationError(f"excluded tokens appear in the pair list: {clash}")

    if isinstance(corpus, Path):
        text = corpus.read_text(encoding="utf-8")
    elif isinstance(corpus, str):
        text = corpus
    else:
        text = corpus.read()

    out: list[SentencePair] = []
    seen = skipped_multiple = skipped_excluded = skipped_too_long = 0
    for offset, raw_sentence in split_sentences(text):
        if len(out) >= limit:
            break
        seen += 1
        tokens = raw_sentence.split()
        if len(tokens) > max_tokens:
            skipped_too_long += 1
            continue
        cores = [_EDGE_PUNCT.sub("", tok) for tok in tokens]
        if any(_fold_first(core) in excluded_folded for core in cores if core):
            skipped_excluded += 1
            continue
        hits = [
            i for i, core in enumerate(cores) if core and _fold_first(core) in swap
        ]
        if len(hits) != 1:
            if len(hits) > 1:
                skipped_multiple += 1
            continue
        position = hits[0]
        found = cores[position]
        replacement = _match_capitalization(swap[_fold_first(found)], found)
        token = tokens[position]
        core_start = token.index(found)
        swapped_token = (
            token[:core_start] + replacement + token[core_start + len(found) :]
        )
        swapped_tokens = list(tokens)
        swapped_tokens[position] = swapped_token
        out.append(
            SentencePair(
                pair_id=f"p{len(out)}",
                original=" ".join(tokens),
                swapped=" ".join(swapped_tokens),
                pivot=(found, replacement),
                offset=offset,
            )
        )
    if not out:
        warnings.warn("no qualifying sentence found; emitting nothing")
    stats = PairGenStats(
        emitted=len(out),
        sentences_seen=seen,
        skipped_multiple=skipped_multiple,
        skipped_excluded=skipped_excluded,
        skipped_too_long=skipped_too_long,
    )
    return out, stats


def pairs_to_manifest(pairs: Sequence[SentencePair]) -> dict[str, SentenceMeta]:
    manifest: dict[str, SentenceMeta] = {}
    for pair in pairs:
        manifest[f"{pair.pair_id}a"] = SentenceMeta(
            text=pair.original, group="original", pair_id=pair.pair_id
        )
        manifest[f"{pair.pair_id}b"] = SentenceMeta(
            text=pair.swapped, group="swapped", pair_id=pair.pair_id
        )
    return manifest


def emit_manifest(
    pairs: Sequence[SentencePair],
    manifest_path: str | Path,
    sentences_path: str | Path,
) -> None:
    """Write the manifest TSV and the "<id>\\t<text>" sentence list."""
    manifest = pairs_to_manifest(pairs)
    save_manifest(manifest, manifest_path)
    with open(sentences_path, "w", encoding="utf-8", newline="\n") as handle:
        for sentence_id, meta in manifest.items():
            handle.write(f"{sentence_id}\t{meta.text}\n")


def load_pair_list(path: str | Path) -> list[tuple[str, str]]:
    """Pair list from JSON: either [[a, b], ...] or a debias-lists object."""
    import json

    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    if isinstance(raw, dict):
        raw = raw.get("definitional_pairs")
        if raw is None:
            raise ValidationError(
                "JSON object has no 'definitional_pairs'; pass a pair array instead"
            )
    pairs = [tuple(entry) for entry in raw]
    for pair in pairs:
        if len(pair) != 2:
            raise ValidationError(f"pair {pair!r} is not a 2-tuple")
    return pairs
