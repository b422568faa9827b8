"""Detector model: encoder backend plus a small classification head.

Two readout modes share the same assembled input:

    SL  per-utterance [SEP] states are classified jointly, so every slot in
        the window contributes to the loss; inference keeps the target slot.
    SC  the [CLS] state alone is classified with the target's tag.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from ..corpus import TD
from ..errors import ContractError
from .config import MODE_SC, MODE_SL, DetectorConfig
from .inputs import DetectorInput, assemble_detector_input
from .windows import Window

# class indices used by the head; TD is the positive class
LABEL_NON_TD = 0
LABEL_TD = 1
IGNORE_INDEX = -100


@dataclass
class DetectorBatch:
    """Padded tensors for a list of assembled inputs."""

    input_ids: torch.Tensor  # (B, T)
    attention_mask: torch.Tensor  # (B, T)
    sep_positions: torch.Tensor  # (B, w)
    target_pos: int


def collate_inputs(inputs: list[DetectorInput], pad_id: int) -> DetectorBatch:
    if not inputs:
        raise ContractError("cannot collate an empty batch")
    target_pos = inputs[0].target_pos
    width = len(inputs[0].sep_positions)
    for item in inputs:
        if item.target_pos != target_pos or len(item.sep_positions) != width:
            raise ContractError("mixed window geometry in one batch")
    max_len = max(len(item.token_ids) for item in inputs)
    ids = torch.full((len(inputs), max_len), pad_id, dtype=torch.long)
    mask = torch.zeros((len(inputs), max_len), dtype=torch.long)
    seps = torch.zeros((len(inputs), width), dtype=torch.long)
    for row, item in enumerate(inputs):
        ids[row, : len(item.token_ids)] = torch.tensor(item.token_ids, dtype=torch.long)
        mask[row, : len(item.token_ids)] = 1
        seps[row] = torch.tensor(item.sep_positions, dtype=torch.long)
    return DetectorBatch(ids, mask, seps, target_pos)


def _head(input_size: int, hidden_dims: tuple[int, ...], num_classes: int, dropout: float) -> nn.Sequential:
    layers: list[nn.Module] = []
    size = input_size
    for dim in hidden_dims:
        layers.extend([nn.Linear(size, dim), nn.ReLU(), nn.Dropout(dropout)])
        size = dim
    layers.append(nn.Linear(size, num_classes))
    return nn.Sequential(*layers)


class DetectorModel(nn.Module):
    """Windowed decision-utterance classifier over an encoder backend."""

    def __init__(self, backend: nn.Module, config: DetectorConfig):
        super().__init__()
        self.backend = backend
        self.config = config
        self.head = _head(backend.hidden_size, config.head_hidden_dims, config.num_classes, config.dropout)

    def forward(self, batch: DetectorBatch) -> torch.Tensor:
        """Logits: (B, w, C) in SL mode, (B, C) in SC mode."""
        states = self.backend(batch.input_ids, batch.attention_mask)
        if self.config.mode == MODE_SL:
            index = batch.sep_positions.unsqueeze(-1).expand(-1, -1, states.size(-1))
            sep_states = torch.gather(states, 1, index)
            return self.head(sep_states)
        return self.head(states[:, 0])

    @torch.no_grad()
    def predict_proba(self, windows: list[Window], batch_size: int = 32) -> list[float]:
        """Probability of the positive class for each window's target slot."""
        self.eval()
        pad_id = self.backend.tokenizer.pad_id
        probs: list[float] = []
        for start in range(0, len(windows), batch_size):
            chunk = windows[start : start + batch_size]
            inputs = [assemble_detector_input(w, self.backend.tokenizer, self.config.max_length) for w in chunk]
            batch = collate_inputs(inputs, pad_id)
            logits = self(batch)
            if self.config.mode == MODE_SL:
                logits = logits[:, batch.target_pos]
            probs.extend(torch.softmax(logits, dim=-1)[:, LABEL_TD].tolist())
        return probs


def window_loss(
    model: DetectorModel,
    batch: DetectorBatch,
    windows: list[Window],
    class_weight: torch.Tensor | None,
) -> torch.Tensor:
    """Cross-entropy for one batch of gold-tagged windows.

    SL spreads the loss over every real slot (PAD slots are masked out);
    SC trains on the target slot only.
    """
    logits = model(batch)
    if model.config.mode == MODE_SC:
        labels = torch.tensor([LABEL_TD if w.target_tag == TD else LABEL_NON_TD for w in windows])
        return nn.functional.cross_entropy(logits, labels, weight=class_weight)
    labels = torch.full((len(windows), windows[0].size), IGNORE_INDEX, dtype=torch.long)
    for row, window in enumerate(windows):
        if window.tags is None:
            raise ContractError(f"window for {window.utterances[window.target_pos].id} has no gold tags")
        for slot, tag in enumerate(window.tags):
            if tag is not None:
                labels[row, slot] = LABEL_TD if tag == TD else LABEL_NON_TD
    return nn.functional.cross_entropy(
        logits.reshape(-1, logits.size(-1)),
        labels.reshape(-1),
        weight=class_weight,
        ignore_index=IGNORE_INDEX,
    )
