"""Automatic rewrite-quality metrics and human-evaluation score aggregation.

All text metrics are sentence-level, bounded in [0, 1], and computed over
n-gram multisets from a pluggable tokenizer (whitespace by default; pass a
morphological analyzer's tokenize function for Japanese). Corpus scores are
macro-averages of per-sample scores.

BLEU is sentence-level with add-one smoothing on the order-2..4 modified
precisions (unsmoothed order-1); short rewrites make unsmoothed BLEU
degenerate. Restoration f-scores count only the n-grams a text adds over the
original utterance (multiset difference), so a prediction that parrots the
original scores zero however fluent it is.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import ConfigError, ContractError

Tokenizer = Callable[[str], list[str]]


def whitespace_tokenize(text: str) -> list[str]:
    return text.split()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _overlap(a: Counter, b: Counter) -> int:
    return sum((a & b).values())


def rouge_n(prediction: str, reference: str, n: int, tokenizer: Tokenizer = whitespace_tokenize) -> float:
    """N-gram overlap F1 between a prediction and a nonempty reference.

    A prediction with fewer than n tokens scores 0.
    """
    if n not in (1, 2):
        raise ConfigError(f"rouge_n supports n in (1, 2), got {n}")
    ref_tokens = tokenizer(reference)
    if not ref_tokens:
        raise ContractError("reference must be nonempty")
    pred_grams = _ngrams(tokenizer(prediction), n)
    ref_grams = _ngrams(ref_tokens, n)
    total_pred = sum(pred_grams.values())
    total_ref = sum(ref_grams.values())
    if total_pred == 0 or total_ref == 0:
        return 0.0
    hits = _overlap(pred_grams, ref_grams)
    precision = hits / total_pred
    recall = hits / total_ref
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def bleu(
    prediction: str,
    reference: str,
    tokenizer: Tokenizer = whitespace_tokenize,
    max_n: int = 4,
) -> float:
    """Sentence-level BLEU: geometric mean of modified n-gram precisions
    times a brevity penalty.

    Order-1 precision is unsmoothed (zero unigram overlap means score 0);
    orders 2..max_n use add-one smoothing on both counts.
    """
    pred_tokens = tokenizer(prediction)
    ref_tokens = tokenizer(reference)
    if not ref_tokens:
        raise ContractError("reference must be nonempty")
    if not pred_tokens:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        pred_grams = _ngrams(pred_tokens, n)
        ref_grams = _ngrams(ref_tokens, n)
        hits = _overlap(pred_grams, ref_grams)
        total = sum(pred_grams.values())
        if n == 1:
            if hits == 0:
                return 0.0
            precision = hits / total
        else:
            precision = (hits + 1) / (total + 1)
        log_sum += math.log(precision)
    brevity = 1.0 if len(pred_tokens) >= len(ref_tokens) else math.exp(1 - len(ref_tokens) / len(pred_tokens))
    return brevity * math.exp(log_sum / max_n)


def restored_ngrams(text: str, original: str, n: int, tokenizer: Tokenizer = whitespace_tokenize) -> Counter:
    """Multiset of n-grams `text` adds over `original` (repeats count)."""
    return _ngrams(tokenizer(text), n) - _ngrams(tokenizer(original), n)


def restoration_f(
    prediction: str,
    reference: str,
    original_utterance: str,
    n: int,
    tokenizer: Tokenizer = whitespace_tokenize,
) -> float | None:
    """F1 between the n-grams restored by the prediction and by the reference.

    Returns None when the reference restores nothing (the sample carries no
    restoration signal and is skipped in corpus means). A prediction that
    restores nothing while the reference does scores 0.
    """
    if not tokenizer(reference):
        raise ContractError("reference must be nonempty")
    if not tokenizer(original_utterance):
        raise ContractError("original_utterance must be nonempty")
    ref_restored = restored_ngrams(reference, original_utterance, n, tokenizer)
    if sum(ref_restored.values()) == 0:
        return None
    pred_restored = restored_ngrams(prediction, original_utterance, n, tokenizer)
    total_pred = sum(pred_restored.values())
    if total_pred == 0:
        return 0.0
    hits = _overlap(pred_restored, ref_restored)
    precision = hits / total_pred
    recall = hits / sum(ref_restored.values())
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass
class SampleScores:
    sample_id: str
    rouge1: float
    rouge2: float
    bleu: float
    f1: float | None
    f2: float | None


@dataclass
class EvalReport:
    """Corpus-level metric summary plus the per-sample breakdown.

    Corpus scores are macro-averages; f1/f2 average only samples whose
    reference restores at least one n-gram of that order.
    """

    rouge1: float
    rouge2: float
    bleu: float
    f1: float
    f2: float
    samples: list[SampleScores] = field(default_factory=list)
    f1_sample_count: int = 0
    f2_sample_count: int = 0

    def as_row(self) -> dict[str, float]:
        return {
            "rouge1": self.rouge1,
            "rouge2": self.rouge2,
            "bleu": self.bleu,
            "f1": self.f1,
            "f2": self.f2,
        }


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def evaluate_rewrites(
    predictions: Sequence[str],
    references: Sequence[str],
    originals: Sequence[str],
    tokenizer: Tokenizer = whitespace_tokenize,
    sample_ids: Sequence[str] | None = None,
) -> EvalReport:
    """Score aligned (prediction, reference, original) triples."""
    if not (len(predictions) == len(references) == len(originals)):
        raise ContractError(
            f"length mismatch: {len(predictions)} predictions, "
            f"{len(references)} references, {len(originals)} originals"
        )
    if len(predictions) == 0:
        raise ContractError("need at least one sample")
    if sample_ids is None:
        sample_ids = [str(i) for i in range(len(predictions))]
    samples = []
    for sid, pred, ref, orig in zip(sample_ids, predictions, references, originals):
        samples.append(
            SampleScores(
                sample_id=sid,
                rouge1=rouge_n(pred, ref, 1, tokenizer),
                rouge2=rouge_n(pred, ref, 2, tokenizer),
                bleu=bleu(pred, ref, tokenizer),
                f1=restoration_f(pred, ref, orig, 1, tokenizer),
                f2=restoration_f(pred, ref, orig, 2, tokenizer),
            )
        )
    f1_values = [s.f1 for s in samples if s.f1 is not None]
    f2_values = [s.f2 for s in samples if s.f2 is not None]
    return EvalReport(
        rouge1=_mean([s.rouge1 for s in samples]),
        rouge2=_mean([s.rouge2 for s in samples]),
        bleu=_mean([s.bleu for s in samples]),
        f1=_mean(f1_values),
        f2=_mean(f2_values),
        samples=samples,
        f1_sample_count=len(f1_values),
        f2_sample_count=len(f2_values),
    )


# -- human evaluation -------------------------------------------------------

SCALES = {
    "text_flow": (1, 3),
    "understandability": (1, 3),
    "effectiveness": (1, 5),
}


@dataclass(frozen=True)
class ScoreEntry:
    sample_id: str
    evaluator_id: str
    score: int


@dataclass
class ScoreSheet:
    """Scores collected from human evaluators for one criterion."""

    criterion: str
    entries: list[ScoreEntry] = field(default_factory=list)

    def __post_init__(self):
        if self.criterion not in SCALES:
            raise ConfigError(f"unknown criterion {self.criterion!r}; expected one of {sorted(SCALES)}")

    def add(self, sample_id: str, evaluator_id: str, score: int) -> None:
        self.entries.append(ScoreEntry(sample_id, evaluator_id, score))

    def validate(self) -> None:
        low, high = SCALES[self.criterion]
        seen: set[tuple[str, str]] = set()
        for entry in self.entries:
            if not isinstance(entry.score, int) or not (low <= entry.score <= high):
                raise ContractError(
                    f"{self.criterion} score for sample={entry.sample_id} "
                    f"evaluator={entry.evaluator_id} is {entry.score!r}; scale is {low}..{high}"
                )
            key = (entry.sample_id, entry.evaluator_id)
            if key in seen:
                raise ContractError(
                    f"duplicate {self.criterion} score for sample={entry.sample_id} evaluator={entry.evaluator_id}"
                )
            seen.add(key)


@dataclass
class ScoreAggregate:
    criterion: str
    mean: float
    count: int
    histogram: dict[int, int]
    ratios: dict[int, float]
    share_low: float   # fraction of entries with score <= 2
    share_high: float  # fraction of entries with score >= 4


def aggregate_scores(sheet: ScoreSheet) -> ScoreAggregate:
    """Mean score, score-frequency histogram, and <=2 / >=4 shares for a sheet."""
    sheet.validate()
    if not sheet.entries:
        raise ContractError("score sheet is empty")
    low, high = SCALES[sheet.criterion]
    histogram = {score: 0 for score in range(low, high + 1)}
    for entry in sheet.entries:
        histogram[entry.score] += 1
    count = len(sheet.entries)
    mean = sum(e.score for e in sheet.entries) / count
    ratios = {score: freq / count for score, freq in histogram.items()}
    share_low = sum(freq for score, freq in histogram.items() if score <= 2) / count
    share_high = sum(freq for score, freq in histogram.items() if score >= 4) / count
    return ScoreAggregate(
        criterion=sheet.criterion,
        mean=mean,
        count=count,
        histogram=histogram,
        ratios=ratios,
        share_low=share_low,
        share_high=share_high,
    )


def read_score_sheets(rows: Iterable[dict[str, str]]) -> dict[str, ScoreSheet]:
    """Group raw CSV rows (sample_id, evaluator_id, criterion, score) into sheets."""
    sheets: dict[str, ScoreSheet] = {}
    for lineno, row in enumerate(rows, start=2):  # header is line 1
        criterion = row.get("criterion", "").strip()
        if criterion not in SCALES:
            raise ContractError(f"row {lineno}: unknown criterion {criterion!r}")
        try:
            score = int(row["score"])
        except (KeyError, ValueError) as exc:
            raise ContractError(f"row {lineno}: score must be an integer") from exc
        sheet = sheets.setdefault(criterion, ScoreSheet(criterion=criterion))
        sheet.add(row.get("sample_id", "").strip(), row.get("evaluator_id", "").strip(), score)
    return sheets


def load_score_sheet_csv(path: str) -> dict[str, ScoreSheet]:
    with open(path, newline="", encoding="utf-8") as handle:
        return read_score_sheets(csv.DictReader(handle))
