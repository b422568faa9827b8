"""Context-conditioned rewriting of decision utterances."""

from .backend import Seq2SeqBackend, TinySeq2SeqBackend, build_seq2seq_backend_for_corpus
from .config import MODE_JOINT, MODE_WRITER_ONLY, RewriterConfig
from .context import assemble_context
from .inputs import (
    RewriteExample,
    RewriterInput,
    assemble_rewriter_input,
    build_example,
    derive_picker_labels,
)
from .model import RewriterModel
from .training import (
    RewriterTrainingLog,
    load_rewriter,
    rewrite,
    save_rewriter,
    train_rewriter,
)

__all__ = [
    "Seq2SeqBackend",
    "TinySeq2SeqBackend",
    "build_seq2seq_backend_for_corpus",
    "MODE_JOINT",
    "MODE_WRITER_ONLY",
    "RewriterConfig",
    "assemble_context",
    "RewriteExample",
    "RewriterInput",
    "assemble_rewriter_input",
    "build_example",
    "derive_picker_labels",
    "RewriterModel",
    "RewriterTrainingLog",
    "load_rewriter",
    "rewrite",
    "save_rewriter",
    "train_rewriter",
]
