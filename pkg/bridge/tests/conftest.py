"""Session fixtures: a deterministic tiny BERT saved to a local directory.

Hub downloads are unavailable in CI, so the contract runs against a
randomly initialized miniature encoder with a WordPiece vocabulary
covering the Dutch fixture sentences. Determinism comes from the fixed
init seed and eval-mode CPU inference.
"""

from __future__ import annotations

import pytest
import torch
from tokenizers import Tokenizer
from tokenizers.models import WordPiece
from tokenizers.normalizers import BertNormalizer
from tokenizers.pre_tokenizers import BertPreTokenizer
from tokenizers.processors import TemplateProcessing
from transformers import BertConfig, BertModel, PreTrainedTokenizerFast
from transformers.utils import logging as hf_logging

hf_logging.set_verbosity_error()
hf_logging.disable_progress_bar()

HIDDEN_SIZE = 32
MAX_LENGTH = 24

_WORDS = (
    "dit dat is een de hier daar man vrouw jongen meisje loopt fietst "
    "naar huis park straat markt school winkel kerk nummer plaats bezoekt "
    "ziet praat werkt speelt leest boek tafel fiets stad hond boom en met bij op"
)


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("tiny-model")
    vocab = (
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", ".", ",", "!", "?"]
        + _WORDS.split()
        + [str(i) for i in range(10)]
    )
    backend = Tokenizer(
        WordPiece({token: i for i, token in enumerate(vocab)}, unk_token="[UNK]")
    )
    backend.normalizer = BertNormalizer(lowercase=True)
    backend.pre_tokenizer = BertPreTokenizer()
    backend.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[
            ("[CLS]", vocab.index("[CLS]")),
            ("[SEP]", vocab.index("[SEP]")),
        ],
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        model_max_length=MAX_LENGTH,
    )
    tokenizer.save_pretrained(path)

    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=HIDDEN_SIZE,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=MAX_LENGTH,
    )
    BertModel(config).save_pretrained(path)
    return str(path)
