"""Run a transformer encoder over a sentence list and write vectors.

Input: UTF-8 sentence list, one "<id>\t<text>" per line. Output: the
sentence-vector text format consumed downstream (header "N d", then
"<id> <c1> ... <cd>" rows), plus two sidecars next to the output file:

  * <out>.meta.json — model id, strategy, layer, dtype, truncation count;
  * <out>.warnings.tsv — one row per truncated sentence (only when any
    sentence exceeded the model's input length).

Inference runs in eval mode with gradients disabled; on CPU the output is
reproducible to well below the documented 1e-5 per-component drift bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch

STRATEGIES = ("sentence-start-token", "mean-pool")


class BridgeError(Exception):
    """Input or model problem the caller can act on."""


@dataclass(frozen=True)
class BridgeRequest:
    model: str
    sentences: Path
    out: Path
    strategy: str = "sentence-start-token"
    batch_size: int = 16

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise BridgeError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )
        if self.batch_size < 1:
            raise BridgeError("batch_size must be positive")


def read_sentence_list(path: str | Path) -> list[tuple[str, str]]:
    """Parse "<id>\\t<text>" lines; ids must be unique, the list non-empty."""
    entries: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise BridgeError(
                    f"{path}:{lineno}: expected '<id>\\t<text>', got {line!r}"
                )
            sentence_id, text = line.split("\t", 1)
            if not sentence_id or " " in sentence_id:
                raise BridgeError(f"{path}:{lineno}: bad id {sentence_id!r}")
            if sentence_id in seen:
                raise BridgeError(f"{path}:{lineno}: duplicate id {sentence_id!r}")
            seen.add(sentence_id)
            entries.append((sentence_id, text))
    if not entries:
        raise BridgeError(f"{path}: sentence list is empty")
    return entries


def _load_model(identifier: str):
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(identifier)
        model = AutoModel.from_pretrained(identifier)
    except Exception as exc:
        raise BridgeError(f"cannot load model {identifier!r}: {exc}") from exc
    model.eval()
    return tokenizer, model


def _pool(hidden: torch.Tensor, mask: torch.Tensor, strategy: str) -> torch.Tensor:
    if strategy == "sentence-start-token":
        return hidden[:, 0, :]
    weights = mask.unsqueeze(-1).to(hidden.dtype)
    return (hidden * weights).sum(dim=1) / weights.sum(dim=1).clamp(min=1.0)


def encode_sentences(request: BridgeRequest) -> Path:
    """Encode the sentence list and write the vector file; returns its path."""
    entries = read_sentence_list(request.sentences)
    tokenizer, model = _load_model(request.model)
    max_length = int(min(tokenizer.model_max_length, 100_000))

    truncated: list[tuple[str, int]] = []
    for sentence_id, text in entries:
        length = len(tokenizer(text, truncation=False)["input_ids"])
        if length > max_length:
            truncated.append((sentence_id, length))

    rows: list[torch.Tensor] = []
    with torch.no_grad():
        for start in range(0, len(entries), request.batch_size):
            batch = entries[start : start + request.batch_size]
            encoded = tokenizer(
                [text for _, text in batch],
                return_tensors="pt",
                padding=True,
                truncation=True,
                max_length=max_length,
            )
            hidden = model(**encoded).last_hidden_state
            rows.append(_pool(hidden, encoded["attention_mask"], request.strategy))
    vectors = torch.cat(rows).to(torch.float64).cpu().numpy()

    out = Path(request.out)
    with open(out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{len(entries)} {vectors.shape[1]}\n")
        for (sentence_id, _), row in zip(entries, vectors):
            handle.write(
                sentence_id + " " + " ".join(f"{x:.9g}" for x in row) + "\n"
            )

    meta = {
        "model": request.model,
        "strategy": request.strategy,
        "layer": "final",
        "dtype": str(next(model.parameters()).dtype),
        "max_length": max_length,
        "n_sentences": len(entries),
        "n_truncated": len(truncated),
    }
    with open(f"{out}.meta.json", "w", encoding="utf-8", newline="\n") as handle:
        json.dump(meta, handle, indent=2, sort_keys=True)
        handle.write("\n")
    if truncated:
        with open(f"{out}.warnings.tsv", "w", encoding="utf-8", newline="\n") as handle:
            handle.write("id\ttoken_length\tmax_length\n")
            for sentence_id, length in truncated:
                handle.write(f"{sentence_id}\t{length}\t{max_length}\n")
    return out
