"""Windowed decision-utterance detection."""

from .backend import EncoderBackend, TinyEncoderBackend, build_backend_for_corpus
from .config import MODE_SC, MODE_SL, DetectorConfig
from .inputs import DetectorInput, assemble_detector_input
from .model import DetectorModel
from .training import (
    PRF,
    TrainingLog,
    evaluate_tags,
    load_detector,
    predict_tags,
    save_detector,
    train_detector,
)
from .windows import Window, attach_gold_tags, build_windows, tags_from_labels

__all__ = [
    "EncoderBackend",
    "TinyEncoderBackend",
    "build_backend_for_corpus",
    "MODE_SC",
    "MODE_SL",
    "DetectorConfig",
    "DetectorInput",
    "assemble_detector_input",
    "DetectorModel",
    "PRF",
    "TrainingLog",
    "evaluate_tags",
    "load_detector",
    "predict_tags",
    "save_detector",
    "train_detector",
    "Window",
    "attach_gold_tags",
    "build_windows",
    "tags_from_labels",
]
