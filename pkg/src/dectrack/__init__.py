"""Decision tracking for meeting transcripts.

Pipeline: ingest a transcript, detect decision-related utterances with a
windowed sequence labeler, rewrite each one into a self-contained written-form
decision item using its dialogue context, and serve the items for review
through an HTTP API.

Subpackages and modules:
    corpus    - transcript/label data model, JSONL ingestion, splits, kappa
    detector  - windowing, encoder input assembly, SL/SC heads, training
    augment   - back-translation augmentation of positive windows
    rewriter  - context assembly, picker+writer training, beam decoding
    metrics   - ROUGE/BLEU/restoration f-scores, human score aggregation
    service   - storage, processing jobs, HTTP API
    report    - evaluation/training reports: CSVs plus matplotlib figures
"""

__version__ = "0.1.0"

from .corpus import (
    DatasetSplit,
    DecisionItem,
    DecisionLabel,
    Meeting,
    Utterance,
    cohen_kappa,
    parse_transcript,
    split_by_meeting,
)
from .metrics import (
    EvalReport,
    ScoreSheet,
    aggregate_scores,
    bleu,
    evaluate_rewrites,
    restoration_f,
    rouge_n,
)

__all__ = [
    "DatasetSplit",
    "DecisionItem",
    "DecisionLabel",
    "EvalReport",
    "Meeting",
    "ScoreSheet",
    "Utterance",
    "aggregate_scores",
    "bleu",
    "cohen_kappa",
    "evaluate_rewrites",
    "parse_transcript",
    "restoration_f",
    "rouge_n",
    "split_by_meeting",
    "__version__",
]
