"""Encoder backend abstraction and the bundled self-contained implementation.

A backend is any torch module exposing per-token hidden states plus a
tokenizer with [CLS]/[SEP]/[PAD] special ids. Pretrained transformer
encoders can be adapted behind this surface; the bundled TinyEncoderBackend
is a small bidirectional transformer trained from scratch, which keeps the
pipeline self-contained and fast on CPU.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import torch
from torch import nn

from ..tokenizer import ENCODER_SPECIALS, WordTokenizer


@runtime_checkable
class EncoderBackend(Protocol):
    """Contract: deterministic per-token encodings in eval mode.

    Required attributes:
        tokenizer    - encode(text) -> content token ids, plus special ids
                       for [CLS]/[SEP]/[PAD] via token_id()
        hidden_size  - width of the returned hidden states
        max_length   - hard cap on input length in tokens
    Callable as backend(input_ids, attention_mask) -> (batch, seq, hidden).
    """

    tokenizer: WordTokenizer
    hidden_size: int
    max_length: int

    def __call__(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor: ...


class TinyEncoderBackend(nn.Module):
    """Small bidirectional transformer encoder over a word vocabulary."""

    def __init__(
        self,
        tokenizer: WordTokenizer,
        hidden_size: int = 96,
        num_layers: int = 2,
        num_heads: int = 4,
        ffn_dim: int = 192,
        max_length: int = 256,
        dropout: float = 0.1,
    ):
        super().__init__()
        self.tokenizer = tokenizer
        self.hidden_size = hidden_size
        self.max_length = max_length
        self.hparams = {
            "hidden_size": hidden_size,
            "num_layers": num_layers,
            "num_heads": num_heads,
            "ffn_dim": ffn_dim,
            "max_length": max_length,
            "dropout": dropout,
        }
        self.token_embedding = nn.Embedding(tokenizer.vocab_size, hidden_size, padding_idx=tokenizer.pad_id)
        self.position_embedding = nn.Embedding(max_length, hidden_size)
        self.norm = nn.LayerNorm(hidden_size)
        self.dropout = nn.Dropout(dropout)
        layer = nn.TransformerEncoderLayer(
            d_model=hidden_size,
            nhead=num_heads,
            dim_feedforward=ffn_dim,
            dropout=dropout,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=num_layers, enable_nested_tensor=False)

    def forward(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(input_ids.size(1), device=input_ids.device).unsqueeze(0)
        states = self.token_embedding(input_ids) + self.position_embedding(positions)
        states = self.dropout(self.norm(states))
        return self.encoder(states, src_key_padding_mask=attention_mask == 0)

    @classmethod
    def from_payload(cls, tokenizer_payload: dict, hparams: dict) -> "TinyEncoderBackend":
        return cls(WordTokenizer.from_dict(tokenizer_payload), **hparams)


def build_backend_for_corpus(
    texts, max_length: int = 256, seed: int | None = None, **kwargs
) -> TinyEncoderBackend:
    """Train a vocabulary on the corpus and wrap it in a fresh tiny encoder.

    Passing a seed makes the weight initialization reproducible regardless
    of prior RNG use in the process.
    """
    tokenizer = WordTokenizer.train(texts, specials=ENCODER_SPECIALS)
    if seed is not None:
        torch.manual_seed(seed)
    return TinyEncoderBackend(tokenizer, max_length=max_length, **kwargs)
