"""Sequence-to-sequence backend abstraction and the bundled implementation.

A backend owns the tokenizer, the encoder-decoder weights, and decoding.
Anything exposing the same surface (encoder states for the picker head,
teacher-forced logits, deterministic beam decode) can replace the bundled
TinySeq2SeqBackend, which is a small transformer trained from scratch.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import torch
from torch import nn

from ..errors import SetupError
from ..tokenizer import BOS, EOS, SEQ2SEQ_SPECIALS, WordTokenizer


@runtime_checkable
class Seq2SeqBackend(Protocol):
    """Contract shared by rewriter backends.

    encode() exposes per-token encoder states (the picker head reads them);
    decode_logits() gives teacher-forced next-token logits; decoding must be
    deterministic given weights, input, and beam width.
    """

    tokenizer: WordTokenizer
    hidden_size: int

    def encode(self, src_ids: torch.Tensor, src_mask: torch.Tensor) -> torch.Tensor: ...

    def decode_logits(
        self, memory: torch.Tensor, src_mask: torch.Tensor, tgt_in: torch.Tensor
    ) -> torch.Tensor: ...


class TinySeq2SeqBackend(nn.Module):
    """Small encoder-decoder transformer over a word vocabulary.

    Input and output embeddings are shared, and the generator head is tied
    to the embedding matrix.
    """

    def __init__(
        self,
        tokenizer: WordTokenizer,
        hidden_size: int = 96,
        num_layers: int = 2,
        num_heads: int = 4,
        ffn_dim: int = 192,
        max_length: int = 512,
        max_target_length: int = 128,
        dropout: float = 0.1,
    ):
        super().__init__()
        for special in SEQ2SEQ_SPECIALS:
            if not tokenizer.has_special(special):
                raise SetupError(f"backend tokenizer is missing special token {special!r}")
        self.tokenizer = tokenizer
        self.hidden_size = hidden_size
        self.max_length = max_length
        self.max_target_length = max_target_length
        self.hparams = {
            "hidden_size": hidden_size,
            "num_layers": num_layers,
            "num_heads": num_heads,
            "ffn_dim": ffn_dim,
            "max_length": max_length,
            "max_target_length": max_target_length,
            "dropout": dropout,
        }
        self.embedding = nn.Embedding(tokenizer.vocab_size, hidden_size, padding_idx=tokenizer.pad_id)
        self.src_positions = nn.Embedding(max_length, hidden_size)
        self.tgt_positions = nn.Embedding(max_target_length, hidden_size)
        self.norm = nn.LayerNorm(hidden_size)
        self.dropout = nn.Dropout(dropout)
        encoder_layer = nn.TransformerEncoderLayer(
            d_model=hidden_size, nhead=num_heads, dim_feedforward=ffn_dim, dropout=dropout, batch_first=True
        )
        decoder_layer = nn.TransformerDecoderLayer(
            d_model=hidden_size, nhead=num_heads, dim_feedforward=ffn_dim, dropout=dropout, batch_first=True
        )
        self.encoder = nn.TransformerEncoder(encoder_layer, num_layers=num_layers, enable_nested_tensor=False)
        self.decoder = nn.TransformerDecoder(decoder_layer, num_layers=num_layers)

    @property
    def bos_id(self) -> int:
        return self.tokenizer.token_id(BOS)

    @property
    def eos_id(self) -> int:
        return self.tokenizer.token_id(EOS)

    def _embed(self, ids: torch.Tensor, positions: nn.Embedding) -> torch.Tensor:
        pos = torch.arange(ids.size(1), device=ids.device).unsqueeze(0)
        return self.dropout(self.norm(self.embedding(ids) + positions(pos)))

    def encode(self, src_ids: torch.Tensor, src_mask: torch.Tensor) -> torch.Tensor:
        return self.encoder(self._embed(src_ids, self.src_positions), src_key_padding_mask=src_mask == 0)

    def decode_logits(self, memory: torch.Tensor, src_mask: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        causal = nn.Transformer.generate_square_subsequent_mask(tgt_in.size(1), device=tgt_in.device)
        states = self.decoder(
            self._embed(tgt_in, self.tgt_positions),
            memory,
            tgt_mask=causal,
            memory_key_padding_mask=src_mask == 0,
        )
        # generator tied to the embedding matrix
        return states @ self.embedding.weight.T

    @torch.no_grad()
    def generate_greedy(
        self, src_ids: torch.Tensor, src_mask: torch.Tensor, max_tokens: int = 64
    ) -> list[list[int]]:
        """Batched greedy decode; returns content ids per sample (no BOS/EOS)."""
        self.eval()
        max_tokens = min(max_tokens, self.max_target_length - 1)
        batch = src_ids.size(0)
        memory = self.encode(src_ids, src_mask)
        tgt = torch.full((batch, 1), self.bos_id, dtype=torch.long, device=src_ids.device)
        finished = torch.zeros(batch, dtype=torch.bool)
        for _ in range(max_tokens):
            logits = self.decode_logits(memory, src_mask, tgt)[:, -1]
            next_ids = logits.argmax(dim=-1)
            next_ids[finished] = self.tokenizer.pad_id
            tgt = torch.cat([tgt, next_ids.unsqueeze(1)], dim=1)
            finished |= next_ids == self.eos_id
            if bool(finished.all()):
                break
        outputs: list[list[int]] = []
        for row in tgt[:, 1:].tolist():
            ids = []
            for token in row:
                if token in (self.eos_id, self.tokenizer.pad_id):
                    break
                ids.append(token)
            outputs.append(ids)
        return outputs

    @torch.no_grad()
    def generate_beam(self, src_ids: list[int], beam_width: int = 5, max_tokens: int = 64) -> list[int]:
        """Beam decode for one input; deterministic, ties broken by beam
        order then token id. Scores are raw log-probability sums."""
        self.eval()
        max_tokens = min(max_tokens, self.max_target_length - 1)
        src = torch.tensor([src_ids], dtype=torch.long)
        mask = torch.ones_like(src)
        memory = self.encode(src, mask)
        active: list[tuple[float, list[int]]] = [(0.0, [self.bos_id])]
        done: list[tuple[float, list[int]]] = []
        for _ in range(max_tokens):
            if not active or len(done) >= beam_width:
                break
            k = len(active)
            tgt = torch.tensor([ids for _, ids in active], dtype=torch.long)
            logits = self.decode_logits(memory.expand(k, -1, -1), mask.expand(k, -1), tgt)[:, -1]
            logprobs = torch.log_softmax(logits, dim=-1)
            scores = torch.tensor([s for s, _ in active]).unsqueeze(1) + logprobs
            flat = scores.reshape(-1)
            top = torch.topk(flat, min(beam_width, flat.numel()))
            next_active: list[tuple[float, list[int]]] = []
            vocab = logprobs.size(-1)
            for score, flat_idx in zip(top.values.tolist(), top.indices.tolist()):
                beam_idx, token = divmod(flat_idx, vocab)
                ids = active[beam_idx][1] + [token]
                if token == self.eos_id:
                    done.append((score, ids))
                else:
                    next_active.append((score, ids))
            active = next_active[:beam_width]
        candidates = done if done else [(s, ids + [self.eos_id]) for s, ids in active]
        best = max(candidates, key=lambda c: c[0])
        return [t for t in best[1][1:] if t != self.eos_id]

    @classmethod
    def from_payload(cls, tokenizer_payload: dict, hparams: dict) -> "TinySeq2SeqBackend":
        return cls(WordTokenizer.from_dict(tokenizer_payload), **hparams)


def build_seq2seq_backend_for_corpus(texts, seed: int | None = None, **kwargs) -> TinySeq2SeqBackend:
    """Train a vocabulary on the corpus and wrap it in a fresh backend.

    Passing a seed makes the weight initialization reproducible regardless
    of prior RNG use in the process.
    """
    tokenizer = WordTokenizer.train(texts, specials=SEQ2SEQ_SPECIALS)
    if seed is not None:
        torch.manual_seed(seed)
    return TinySeq2SeqBackend(tokenizer, **kwargs)
