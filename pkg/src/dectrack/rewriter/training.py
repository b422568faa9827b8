"""Training, inference, and checkpointing for the rewriter."""

from __future__ import annotations

import copy
import json
import random
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import torch

from ..corpus import TD, DecisionItem, DecisionLabel, Meeting
from ..errors import ConfigError, ContractError
from ..metrics import rouge_n
from .backend import TinySeq2SeqBackend
from .config import MODE_JOINT, RewriterConfig
from .context import assemble_context
from .inputs import RewriteExample, assemble_rewriter_input
from .model import RewriterModel, collate_examples


@dataclass
class RewriterEpochRecord:
    epoch: int
    train_loss: float
    gen_loss: float
    picker_loss: float | None
    val_rouge1: float | None  # None on epochs without a validation pass


@dataclass
class RewriterTrainingLog:
    records: list[RewriterEpochRecord] = field(default_factory=list)
    best_epoch: int = -1

    def add(self, record: RewriterEpochRecord) -> None:
        self.records.append(record)

    def rows(self) -> list[dict]:
        return [vars(r) for r in self.records]


def _val_rouge1(model: RewriterModel, examples: list[RewriteExample]) -> float:
    """Mean ROUGE-1 of greedy decodes against gold rewrites; empty decodes
    score 0 (their reference is nonempty by construction)."""
    decoded = model.decode_greedy([ex.input for ex in examples])
    scores = []
    for text, ex in zip(decoded, examples):
        scores.append(rouge_n(text, ex.gold_rewrite, n=1) if text.strip() else 0.0)
    return sum(scores) / len(scores)


def train_rewriter(
    train_examples: list[RewriteExample],
    val_examples: list[RewriteExample],
    config: RewriterConfig,
    backend: TinySeq2SeqBackend,
    mode: str = MODE_JOINT,
) -> tuple[RewriterModel, RewriterTrainingLog]:
    """Train writer (and picker, in joint mode); return the model restored
    to its best validation-ROUGE-1 checkpoint.

    Validation decoding runs every config.val_every epochs and on the final
    epoch; ties keep the earlier checkpoint.
    """
    if not train_examples:
        raise ConfigError("empty training set")
    if not val_examples:
        raise ConfigError("empty validation set")
    if mode == MODE_JOINT:
        missing = [i for i, ex in enumerate(train_examples) if ex.picker_labels is None]
        if missing:
            raise ContractError(f"joint mode requires picker labels on all examples; missing: {missing}")
    torch.manual_seed(config.seed)
    model = RewriterModel(backend, config, mode=mode)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
    )
    log = RewriterTrainingLog()
    best_score = -1.0
    best_state: dict | None = None
    order = list(range(len(train_examples)))
    for epoch in range(config.epochs):
        model.train()
        random.Random(config.seed + epoch).shuffle(order)
        total = gen_total = picker_total = 0.0
        picker_batches = 0
        batches = 0
        for start in range(0, len(order), config.batch_size):
            chunk = [train_examples[i] for i in order[start : start + config.batch_size]]
            batch = collate_examples(chunk, backend, with_picker=mode == MODE_JOINT)
            gen_loss, picker_loss = model.losses(batch)
            loss = gen_loss
            if picker_loss is not None:
                loss = loss + config.picker_loss_weight * picker_loss
                picker_total += picker_loss.item()
                picker_batches += 1
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += loss.item()
            gen_total += gen_loss.item()
            batches += 1
        val_score: float | None = None
        if (epoch + 1) % config.val_every == 0 or epoch == config.epochs - 1:
            val_score = _val_rouge1(model, val_examples)
            if val_score > best_score:
                best_score = val_score
                best_state = copy.deepcopy(model.state_dict())
                log.best_epoch = epoch
        log.add(
            RewriterEpochRecord(
                epoch=epoch,
                train_loss=total / batches,
                gen_loss=gen_total / batches,
                picker_loss=picker_total / picker_batches if picker_batches else None,
                val_rouge1=val_score,
            )
        )
    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()
    return model, log


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def rewrite(
    meeting: Meeting,
    decision_label: DecisionLabel,
    model: RewriterModel,
    rewriter_version: str = "",
) -> DecisionItem:
    """Decode one decision utterance into a written-form item.

    An empty decode falls back to the original utterance text and marks the
    item degraded rather than failing.
    """
    if decision_label.tag != TD:
        raise ContractError(f"rewrite requires a TD-tagged label, got {decision_label.tag!r}")
    utterance = meeting.utterance_by_id(decision_label.utterance_id)
    tokenizer = model.backend.tokenizer
    context = assemble_context(meeting, utterance.index, model.config.context_budget_tokens, tokenizer)
    built = assemble_rewriter_input(context, utterance, tokenizer)
    text = model.decode_beam(built).strip()
    degraded = text == ""
    if degraded:
        text = utterance.text
    return DecisionItem(
        id=uuid.uuid4().hex,
        meeting_id=meeting.id,
        utterance_id=utterance.id,
        original_text=utterance.text,
        rewritten_text=text,
        degraded=degraded,
        created_at=_now_iso(),
        context_token_count=built.context_token_count,
        rewriter_version=rewriter_version or f"{model.mode}:{tokenizer.fingerprint()}",
    )


def save_rewriter(model: RewriterModel, path: str | Path) -> Path:
    """Write the checkpoint plus a human-readable metadata sidecar."""
    path = Path(path)
    backend = model.backend
    payload = {
        "state_dict": model.state_dict(),
        "config": model.config.to_dict(),
        "mode": model.mode,
        "tokenizer": backend.tokenizer.to_dict(),
        "backend_hparams": backend.hparams,
    }
    torch.save(payload, path)
    meta = {
        "mode": model.mode,
        "beam_width": model.config.beam_width,
        "context_budget_tokens": model.config.context_budget_tokens,
        "tokenizer_fingerprint": backend.tokenizer.fingerprint(),
    }
    sidecar = path.with_suffix(path.suffix + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return sidecar


def load_rewriter(path: str | Path) -> RewriterModel:
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    config = RewriterConfig.from_dict(payload["config"])
    backend = TinySeq2SeqBackend.from_payload(payload["tokenizer"], payload["backend_hparams"])
    model = RewriterModel(backend, config, mode=payload["mode"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
