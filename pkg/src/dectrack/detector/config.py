"""Detector hyperparameters and run settings."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ConfigError

MODE_SL = "SL"  # sequence labeling: one prediction per utterance slot
MODE_SC = "SC"  # sentence classification: one prediction from [CLS]


@dataclass
class DetectorConfig:
    window_size: int = 5
    stride: int = 1
    mode: str = MODE_SL
    epochs: int = 20
    dropout: float = 0.2
    batch_size: int = 16
    learning_rate: float = 5e-5
    head_hidden_dims: tuple[int, ...] = (512, 400)
    num_classes: int = 2
    threshold: float = 0.5
    max_length: int = 256
    seed: int = 0
    # positive-class loss weight; "auto" uses the negative/positive count ratio
    positive_weight: float | str = "auto"

    def __post_init__(self):
        if self.window_size < 2:
            raise ConfigError(f"window_size must be >= 2, got {self.window_size}")
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")
        if self.mode not in (MODE_SL, MODE_SC):
            raise ConfigError(f"mode must be SL or SC, got {self.mode!r}")
        if not (0.0 < self.threshold < 1.0):
            raise ConfigError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.epochs < 1 or self.batch_size < 1 or self.max_length < 8:
            raise ConfigError("epochs, batch_size and max_length must be positive")
        self.head_hidden_dims = tuple(self.head_hidden_dims)

    @property
    def target_pos(self) -> int:
        # prediction is kept for the second utterance from the back of the window
        return self.window_size - 2

    def to_dict(self) -> dict:
        payload = asdict(self)
        payload["head_hidden_dims"] = list(self.head_hidden_dims)
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "DetectorConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown detector config keys: {sorted(unknown)}")
        return cls(**payload)

    @classmethod
    def load(cls, path: str | Path) -> "DetectorConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
