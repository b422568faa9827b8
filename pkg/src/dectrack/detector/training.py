"""Training, inference, evaluation, and checkpointing for the detector."""

from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch

from ..corpus import NON_TD, TD, DecisionLabel, Meeting
from ..errors import ContractError, ImbalanceError
from .backend import TinyEncoderBackend
from .config import MODE_SC, MODE_SL, DetectorConfig
from .inputs import assemble_detector_input
from .model import LABEL_TD, DetectorModel, collate_inputs, window_loss
from .windows import Window, build_windows


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_precision: float
    val_recall: float
    val_f1: float


@dataclass
class TrainingLog:
    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = -1

    def add(self, record: EpochRecord) -> None:
        self.records.append(record)

    def rows(self) -> list[dict]:
        return [vars(r) for r in self.records]


@dataclass
class PRF:
    """Precision/recall/F1 for the positive (decision) class."""

    precision: float
    recall: float
    f1: float
    true_positives: int = 0
    predicted_positives: int = 0
    gold_positives: int = 0


def prf_from_counts(tp: int, pred_pos: int, gold_pos: int) -> PRF:
    precision = tp / pred_pos if pred_pos else 0.0
    recall = tp / gold_pos if gold_pos else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return PRF(precision, recall, f1, tp, pred_pos, gold_pos)


def _training_label_tags(windows: list[Window], mode: str) -> list[str]:
    """Tags the loss actually sees: all real slots in SL, targets in SC."""
    tags: list[str] = []
    for window in windows:
        if window.tags is None:
            raise ContractError(f"window targeting {window.utterances[window.target_pos].id} has no gold tags")
        if mode == MODE_SC:
            tags.append(window.target_tag)  # type: ignore[arg-type]
        else:
            tags.extend(t for t in window.tags if t is not None)
    return tags


def class_weights(windows: list[Window], config: DetectorConfig) -> torch.Tensor | None:
    """Loss weight for the positive class: negative/positive count ratio.

    config.positive_weight: "auto" computes the ratio, a number fixes it,
    None disables weighting.
    """
    if config.positive_weight is None:
        return None
    tags = _training_label_tags(windows, config.mode)
    positives = sum(1 for t in tags if t == TD)
    negatives = len(tags) - positives
    if positives == 0:
        raise ImbalanceError("training windows contain no positive (decision) tags")
    if config.positive_weight == "auto":
        weight = negatives / positives
    else:
        weight = float(config.positive_weight)
    return torch.tensor([1.0, weight], dtype=torch.float)


def _validate_windows(model: DetectorModel, windows: list[Window], threshold: float) -> PRF:
    probs = model.predict_proba(windows)
    tp = pred_pos = gold_pos = 0
    for window, prob in zip(windows, probs):
        gold = window.target_tag == TD
        pred = prob >= threshold
        tp += int(gold and pred)
        pred_pos += int(pred)
        gold_pos += int(gold)
    return prf_from_counts(tp, pred_pos, gold_pos)


def train_detector(
    train_windows: list[Window],
    val_windows: list[Window],
    config: DetectorConfig,
    backend: TinyEncoderBackend,
) -> tuple[DetectorModel, TrainingLog]:
    """Train a detector and return it restored to its best-validation epoch.

    Model selection is by validation F1 on target slots; ties keep the
    earlier epoch. Same seed, same data, same config reproduce the same
    training log.
    """
    if not train_windows:
        raise ContractError("no training windows")
    if not val_windows:
        raise ContractError("no validation windows")
    torch.manual_seed(config.seed)
    model = DetectorModel(backend, config)
    weight = class_weights(train_windows, config)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    log = TrainingLog()
    pad_id = backend.tokenizer.pad_id
    best_f1 = -1.0
    best_state: dict | None = None
    order = list(range(len(train_windows)))
    for epoch in range(config.epochs):
        model.train()
        random.Random(config.seed + epoch).shuffle(order)
        total_loss = 0.0
        batches = 0
        for start in range(0, len(order), config.batch_size):
            chunk = [train_windows[i] for i in order[start : start + config.batch_size]]
            inputs = [assemble_detector_input(w, backend.tokenizer, config.max_length) for w in chunk]
            batch = collate_inputs(inputs, pad_id)
            loss = window_loss(model, batch, chunk, weight)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total_loss += loss.item()
            batches += 1
        val = _validate_windows(model, val_windows, config.threshold)
        log.add(EpochRecord(epoch, total_loss / batches, val.precision, val.recall, val.f1))
        if val.f1 > best_f1:
            best_f1 = val.f1
            best_state = copy.deepcopy(model.state_dict())
            log.best_epoch = epoch
    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()
    return model, log


def predict_tags(meeting: Meeting, model: DetectorModel, batch_size: int = 32) -> list[DecisionLabel]:
    """Tag every utterance of a meeting, one label per utterance.

    Windows are rebuilt at stride 1 regardless of the training stride, so
    each utterance is the target of exactly one window.
    """
    windows = build_windows(meeting, model.config.window_size, stride=1)
    probs = model.predict_proba(windows, batch_size=batch_size)
    labels = []
    for window, prob in zip(windows, probs):
        tag = TD if prob >= model.config.threshold else NON_TD
        labels.append(DecisionLabel(utterance_id=window.target.id, tag=tag, source="predicted"))
    return labels


def evaluate_tags(predicted: list[DecisionLabel], gold: list[DecisionLabel]) -> PRF:
    """Positive-class P/R/F1 over utterances.

    Both sides must cover the same utterance ids; missing or extra ids are
    a contract violation and the offenders are listed.
    """
    pred_by_id = {label.utterance_id: label.tag for label in predicted}
    gold_by_id = {label.utterance_id: label.tag for label in gold}
    if len(pred_by_id) != len(predicted):
        raise ContractError("duplicate utterance ids in predictions")
    if len(gold_by_id) != len(gold):
        raise ContractError("duplicate utterance ids in gold labels")
    missing = sorted(gold_by_id.keys() - pred_by_id.keys())
    extra = sorted(pred_by_id.keys() - gold_by_id.keys())
    if missing or extra:
        raise ContractError(f"label coverage mismatch: missing={missing} extra={extra}")
    tp = sum(1 for i, tag in pred_by_id.items() if tag == TD and gold_by_id[i] == TD)
    pred_pos = sum(1 for tag in pred_by_id.values() if tag == TD)
    gold_pos = sum(1 for tag in gold_by_id.values() if tag == TD)
    return prf_from_counts(tp, pred_pos, gold_pos)


def save_detector(model: DetectorModel, path: str | Path) -> Path:
    """Write the checkpoint plus a human-readable metadata sidecar."""
    path = Path(path)
    backend = model.backend
    payload = {
        "state_dict": model.state_dict(),
        "config": model.config.to_dict(),
        "tokenizer": backend.tokenizer.to_dict(),
        "backend_hparams": backend.hparams,
    }
    torch.save(payload, path)
    meta = {
        "mode": model.config.mode,
        "window_size": model.config.window_size,
        "threshold": model.config.threshold,
        "tokenizer_fingerprint": backend.tokenizer.fingerprint(),
    }
    sidecar = path.with_suffix(path.suffix + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return sidecar


def load_detector(path: str | Path) -> DetectorModel:
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    config = DetectorConfig.from_dict(payload["config"])
    backend = TinyEncoderBackend.from_payload(payload["tokenizer"], payload["backend_hparams"])
    model = DetectorModel(backend, config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
