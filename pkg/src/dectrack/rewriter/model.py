"""Rewriter model: shared-encoder picker head plus seq2seq writer."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from ..errors import ContractError
from .backend import TinySeq2SeqBackend
from .config import MODE_JOINT, MODES, RewriterConfig
from .inputs import RewriteExample, RewriterInput

GEN_IGNORE_INDEX = -100


@dataclass
class RewriterBatch:
    src_ids: torch.Tensor  # (B, S)
    src_mask: torch.Tensor  # (B, S)
    tgt_in: torch.Tensor  # (B, T) decoder input, BOS-led
    tgt_labels: torch.Tensor  # (B, T) next-token labels, pad -> ignore
    picker_positions: list[list[int]]  # per-sample context token positions
    picker_labels: list[list[int]] | None


def collate_examples(
    examples: list[RewriteExample],
    backend: TinySeq2SeqBackend,
    with_picker: bool,
) -> RewriterBatch:
    if not examples:
        raise ContractError("cannot collate an empty batch")
    tok = backend.tokenizer
    pad = tok.pad_id
    src_rows = [ex.input.token_ids for ex in examples]
    max_src = max(len(r) for r in src_rows)
    src_ids = torch.full((len(examples), max_src), pad, dtype=torch.long)
    src_mask = torch.zeros((len(examples), max_src), dtype=torch.long)
    for i, row in enumerate(src_rows):
        src_ids[i, : len(row)] = torch.tensor(row, dtype=torch.long)
        src_mask[i, : len(row)] = 1

    limit = backend.max_target_length - 1
    tgt_rows = [tok.encode(ex.gold_rewrite)[:limit] + [backend.eos_id] for ex in examples]
    max_tgt = max(len(r) for r in tgt_rows)
    tgt_in = torch.full((len(examples), max_tgt), pad, dtype=torch.long)
    tgt_labels = torch.full((len(examples), max_tgt), GEN_IGNORE_INDEX, dtype=torch.long)
    for i, row in enumerate(tgt_rows):
        tgt_in[i, 0] = backend.bos_id
        tgt_in[i, 1 : len(row)] = torch.tensor(row[:-1], dtype=torch.long)
        tgt_labels[i, : len(row)] = torch.tensor(row, dtype=torch.long)

    picker_labels = None
    if with_picker:
        missing = [i for i, ex in enumerate(examples) if ex.picker_labels is None]
        if missing:
            raise ContractError(f"joint training requires picker labels; missing on examples {missing}")
        picker_labels = [list(ex.picker_labels) for ex in examples]
    return RewriterBatch(
        src_ids=src_ids,
        src_mask=src_mask,
        tgt_in=tgt_in,
        tgt_labels=tgt_labels,
        picker_positions=[list(ex.input.context_token_positions) for ex in examples],
        picker_labels=picker_labels,
    )


class RewriterModel(nn.Module):
    """Writer (seq2seq generation) with an optional token-salience picker
    trained on the shared encoder states."""

    def __init__(self, backend: TinySeq2SeqBackend, config: RewriterConfig, mode: str = MODE_JOINT):
        super().__init__()
        if mode not in MODES:
            raise ContractError(f"mode must be one of {MODES}, got {mode!r}")
        self.backend = backend
        self.config = config
        self.mode = mode
        self.picker_head = nn.Linear(backend.hidden_size, 1)

    def losses(self, batch: RewriterBatch) -> tuple[torch.Tensor, torch.Tensor | None]:
        """(generation CE, picker BCE or None). The picker term exists only
        in joint mode and only when the batch has any context tokens."""
        memory = self.backend.encode(batch.src_ids, batch.src_mask)
        logits = self.backend.decode_logits(memory, batch.src_mask, batch.tgt_in)
        gen_loss = nn.functional.cross_entropy(
            logits.reshape(-1, logits.size(-1)),
            batch.tgt_labels.reshape(-1),
            ignore_index=GEN_IGNORE_INDEX,
        )
        if self.mode != MODE_JOINT or batch.picker_labels is None:
            return gen_loss, None
        scores = self.picker_head(memory).squeeze(-1)  # (B, S)
        flat_scores = []
        flat_labels = []
        for row, (positions, labels) in enumerate(zip(batch.picker_positions, batch.picker_labels)):
            for pos, label in zip(positions, labels):
                flat_scores.append(scores[row, pos])
                flat_labels.append(float(label))
        if not flat_scores:
            return gen_loss, None
        picker_loss = nn.functional.binary_cross_entropy_with_logits(
            torch.stack(flat_scores), torch.tensor(flat_labels)
        )
        return gen_loss, picker_loss

    @torch.no_grad()
    def decode_greedy(self, inputs: list[RewriterInput], batch_size: int = 16) -> list[str]:
        tok = self.backend.tokenizer
        texts: list[str] = []
        for start in range(0, len(inputs), batch_size):
            chunk = inputs[start : start + batch_size]
            rows = [item.token_ids for item in chunk]
            max_src = max(len(r) for r in rows)
            src = torch.full((len(rows), max_src), tok.pad_id, dtype=torch.long)
            mask = torch.zeros((len(rows), max_src), dtype=torch.long)
            for i, row in enumerate(rows):
                src[i, : len(row)] = torch.tensor(row, dtype=torch.long)
                mask[i, : len(row)] = 1
            for ids in self.backend.generate_greedy(src, mask, self.config.max_decode_tokens):
                texts.append(tok.decode(ids))
        return texts

    @torch.no_grad()
    def decode_beam(self, item: RewriterInput) -> str:
        ids = self.backend.generate_beam(
            item.token_ids,
            beam_width=self.config.beam_width,
            max_tokens=self.config.max_decode_tokens,
        )
        return self.backend.tokenizer.decode(ids)
