"""Rewriter hyperparameters and run settings."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from ..errors import ConfigError

MODE_JOINT = "joint_picker_writer"
MODE_WRITER_ONLY = "writer_only"
MODES = (MODE_JOINT, MODE_WRITER_ONLY)


@dataclass
class RewriterConfig:
    # context is measured in the rewriter backend's own tokens
    context_budget_tokens: int = 360
    epochs: int = 70
    batch_size: int = 6
    learning_rate: float = 2e-5
    weight_decay: float = 0.01
    beam_width: int = 5
    picker_loss_weight: float = 1.0
    max_decode_tokens: int = 64
    # checkpoint-selection cadence; validation decoding is the slow part
    val_every: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.context_budget_tokens < 1:
            raise ConfigError(f"context_budget_tokens must be >= 1, got {self.context_budget_tokens}")
        if self.beam_width < 1:
            raise ConfigError(f"beam_width must be >= 1, got {self.beam_width}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")
        if self.max_decode_tokens < 1:
            raise ConfigError("max_decode_tokens must be positive")
        if self.val_every < 1:
            raise ConfigError("val_every must be positive")
        if self.picker_loss_weight < 0:
            raise ConfigError("picker_loss_weight must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "RewriterConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown rewriter config keys: {sorted(unknown)}")
        return cls(**payload)

    @classmethod
    def load(cls, path: str | Path) -> "RewriterConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
