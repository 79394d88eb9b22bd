"""Word lists, templates, and debias list resources.

File formats:
  * association test spec: JSON with `test_id` and four named lists
    (`targets_1`, `targets_2`, `attributes_1`, `attributes_2`), each
    `{"name": str, "items": [str]}`.
  * debias lists: JSON `{"gender_specific": [str],
    "definitional_pairs": [[str, str]], "equalize_pairs": [[str, str]]}`.
  * templates: UTF-8 text, one template per line, each containing the
    placeholder `<WeatWord>` exactly once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import FormatError, OovFloorError, ValidationError

PLACEHOLDER = "<WeatWord>"

_LIST_KEYS = ("targets_1", "targets_2", "attributes_1", "attributes_2")


@dataclass(frozen=True)
class WordList:
    """A named list of unique entries (tokens or sentences)."""

    name: str
    items: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise ValidationError(f"list {self.name!r} is empty")
        if len(set(self.items)) != len(self.items):
            dupes = sorted({x for x in self.items if self.items.count(x) > 1})
            raise ValidationError(f"list {self.name!r} has duplicates: {dupes}")


@dataclass(frozen=True)
class TestSpec:
    """Two target lists and two attribute lists for one association test."""

    __test__ = False  # keep pytest from collecting the domain class

    test_id: str
    targets_1: WordList
    targets_2: WordList
    attributes_1: WordList
    attributes_2: WordList

    def __post_init__(self):
        lists = [getattr(self, key) for key in _LIST_KEYS]
        for i, first in enumerate(lists):
            for second in lists[i + 1 :]:
                overlap = set(first.items) & set(second.items)
                if overlap:
                    raise ValidationError(
                        f"lists {first.name!r} and {second.name!r} overlap: "
                        f"{sorted(overlap)}"
                    )

    def lists(self) -> dict[str, WordList]:
        return {key: getattr(self, key) for key in _LIST_KEYS}

    def as_dict(self) -> dict:
        out: dict = {"test_id": self.test_id}
        for key, wl in self.lists().items():
            out[key] = {"name": wl.name, "items": list(wl.items)}
        return out


@dataclass(frozen=True)
class DebiasLists:
    """Word lists driving hard debiasing.

    gender_specific words are never neutralized; definitional pairs fit the
    bias subspace; equalize pairs are re-centered symmetrically about it.
    """

    gender_specific: frozenset[str]
    definitional_pairs: tuple[tuple[str, str], ...]
    equalize_pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "gender_specific", frozenset(self.gender_specific))
        object.__setattr__(
            self, "definitional_pairs", tuple(map(tuple, self.definitional_pairs))
        )
        object.__setattr__(
            self, "equalize_pairs", tuple(map(tuple, self.equalize_pairs))
        )
        if not self.definitional_pairs:
            raise ValidationError("definitional_pairs must be non-empty")
        for kind, pairs in (
            ("definitional", self.definitional_pairs),
            ("equalize", self.equalize_pairs),
        ):
            for pair in pairs:
                if len(pair) != 2:
                    raise ValidationError(f"{kind} pair {pair!r} is not a 2-tuple")
                if pair[0] == pair[1]:
                    raise ValidationError(
                        f"{kind} pair {pair!r} repeats the same token"
                    )
                missing = [t for t in pair if t not in self.gender_specific]
                if missing:
                    raise ValidationError(
                        f"{kind} pair tokens {missing} missing from gender_specific"
                    )


@dataclass(frozen=True)
class TemplateSet:
    """Sentence templates, each holding the placeholder exactly once."""

    templates: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "templates", tuple(self.templates))
        if not self.templates:
            raise ValidationError("template set is empty")
        for template in self.templates:
            if template.count(PLACEHOLDER) != 1:
                raise ValidationError(
                    f"template {template!r} must contain {PLACEHOLDER} exactly once"
                )


def _require(mapping: dict, key: str, path: Path):
    if key not in mapping:
        raise FormatError(f"{path}: missing key {key!r}")
    return mapping[key]


def load_test_spec(path: str | Path) -> TestSpec:
    """Load and validate a test spec JSON file."""
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from None
    test_id = _require(raw, "test_id", path)
    kwargs = {}
    for key in _LIST_KEYS:
        entry = _require(raw, key, path)
        kwargs[key] = WordList(
            name=_require(entry, "name", path),
            items=tuple(_require(entry, "items", path)),
        )
    return TestSpec(test_id=test_id, **kwargs)


def save_test_spec(spec: TestSpec, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(spec.as_dict(), handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def load_debias_lists(path: str | Path) -> DebiasLists:
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return DebiasLists(
        gender_specific=frozenset(_require(raw, "gender_specific", path)),
        definitional_pairs=tuple(
            tuple(pair) for pair in _require(raw, "definitional_pairs", path)
        ),
        equalize_pairs=tuple(
            tuple(pair) for pair in _require(raw, "equalize_pairs", path)
        ),
    )


def load_templates(path: str | Path) -> TemplateSet:
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        lines = [line.rstrip("\n") for line in handle]
    return TemplateSet(tuple(line for line in lines if line.strip()))


def filter_oov(
    spec: TestSpec, vocabulary, min_per_list: int = 2
) -> tuple[TestSpec, dict[str, list[str]]]:
    """Drop entries missing from `vocabulary`, reporting every drop.

    `vocabulary` is anything supporting `in` (an EmbeddingSet, a dict of
    sentence vectors, a set of tokens).

    Raises:
        OovFloorError: a list would fall below `min_per_list`; the error
            carries the full drop report.
    """
    if min_per_list < 1:
        raise ValidationError("min_per_list must be >= 1")
    dropped: dict[str, list[str]] = {}
    filtered: dict[str, WordList] = {}
    short: list[str] = []
    for key, wl in spec.lists().items():
        kept = tuple(item for item in wl.items if item in vocabulary)
        gone = [item for item in wl.items if item not in vocabulary]
        if gone:
            dropped[wl.name] = gone
        if len(kept) < min_per_list:
            short.append(wl.name)
            continue
        filtered[key] = replace(wl, items=kept)
    if short:
        raise OovFloorError(
            f"lists {short} fell below min_per_list={min_per_list} "
            f"after vocabulary filtering",
            dropped,
        )
    return replace(spec, **filtered), dropped


def expand_templates(templates: TemplateSet, spec: TestSpec) -> TestSpec:
    """Expand every list entry through every template (word-major order)."""
    expanded = {}
    for key, wl in spec.lists().items():
        sentences = tuple(
            template.replace(PLACEHOLDER, word)
            for word in wl.items
            for template in templates.templates
        )
        expanded[key] = replace(wl, items=sentences)
    return replace(spec, **expanded)
