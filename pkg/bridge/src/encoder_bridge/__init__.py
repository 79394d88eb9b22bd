"""Sentence-vector extraction from transformer encoders."""

from .encode import BridgeRequest, encode_sentences, read_sentence_list

__version__ = "0.1.0"
