"""Transcript data model, JSONL ingestion, dataset splitting, and annotation agreement.

A meeting is an ordered list of utterances. Decision labels (TD / NON_TD) are
kept separate from the utterances themselves so a meeting can carry a gold
label set and one or more predicted label sets side by side.
"""

from __future__ import annotations

import json
import random
import uuid
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Sequence

from .errors import ConfigError, ContractError, EmptyTranscriptError, TranscriptParseError

TD = "TD"
NON_TD = "NON_TD"
TAGS = (TD, NON_TD)

PAD_UTTERANCE_ID = "__pad__"


@dataclass(frozen=True)
class Utterance:
    """One transcribed speech turn, verbatim (fillers included)."""

    id: str
    index: int
    speaker: str
    text: str
    start_time: float | None = None
    end_time: float | None = None

    @property
    def is_pad(self) -> bool:
        return self.id == PAD_UTTERANCE_ID


def pad_utterance() -> Utterance:
    """Placeholder slot used to complete windows at meeting boundaries."""
    return Utterance(id=PAD_UTTERANCE_ID, index=-1, speaker="", text="")


@dataclass
class Meeting:
    id: str
    title: str
    utterances: list[Utterance]
    recorded_at: str | None = None
    status: str = "uploaded"

    def __post_init__(self):
        for expected, utt in enumerate(self.utterances):
            if utt.index != expected:
                raise ContractError(
                    f"meeting {self.id}: utterance indices must be contiguous 0..n-1, "
                    f"got {utt.index} at position {expected}"
                )
        ids = [u.id for u in self.utterances]
        if len(set(ids)) != len(ids):
            raise ContractError(f"meeting {self.id}: duplicate utterance ids")

    def __len__(self) -> int:
        return len(self.utterances)

    def utterance_by_id(self, utterance_id: str) -> Utterance:
        for utt in self.utterances:
            if utt.id == utterance_id:
                return utt
        raise ContractError(f"meeting {self.id}: unknown utterance id {utterance_id!r}")


@dataclass(frozen=True)
class DecisionLabel:
    """Binary decision tag for one utterance."""

    utterance_id: str
    tag: str
    source: str = "gold"  # "gold" | "predicted"

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ContractError(f"tag must be one of {TAGS}, got {self.tag!r}")


@dataclass
class DatasetSplit:
    """Disjoint train/validation/test partition of meeting ids."""

    train: set[str] = field(default_factory=set)
    validation: set[str] = field(default_factory=set)
    test: set[str] = field(default_factory=set)

    def all_ids(self) -> set[str]:
        return self.train | self.validation | self.test


def parse_transcript(
    stream: BinaryIO | Iterable[bytes | str],
    meeting_id: str | None = None,
    title: str = "",
    fmt: str = "jsonl",
) -> Meeting:
    """Parse a JSONL transcript stream into a Meeting.

    One JSON object per line: {"speaker": str, "text": str, "start": float?, "end": float?}.
    Utterance indices are assigned by line order; blank lines are skipped.
    """
    if fmt != "jsonl":
        raise ConfigError(f"unsupported transcript format {fmt!r}")
    meeting_id = meeting_id or uuid.uuid4().hex
    utterances: list[Utterance] = []
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise TranscriptParseError(f"not valid UTF-8: {exc}", line=lineno) from exc
        if raw.strip() == "":
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise TranscriptParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
        if not isinstance(record, dict):
            raise TranscriptParseError("expected a JSON object", line=lineno)
        for key in ("speaker", "text"):
            if key not in record:
                raise TranscriptParseError(f"missing required key {key!r}", line=lineno)
        if not isinstance(record["text"], str) or not isinstance(record["speaker"], str):
            raise TranscriptParseError("'speaker' and 'text' must be strings", line=lineno)
        index = len(utterances)
        utterances.append(
            Utterance(
                id=f"{meeting_id}:u{index}",
                index=index,
                speaker=record["speaker"],
                text=record["text"],
                start_time=record.get("start"),
                end_time=record.get("end"),
            )
        )
    if not utterances:
        raise EmptyTranscriptError("transcript contains no utterances")
    return Meeting(id=meeting_id, title=title, utterances=utterances, status="uploaded")


def load_labels(stream: BinaryIO | Iterable[bytes | str], meeting: Meeting, source: str = "gold") -> list[DecisionLabel]:
    """Read a per-meeting label file: JSONL of {"utterance_index": int, "tag": "TD"|"NON_TD"}."""
    labels: list[DecisionLabel] = []
    seen: set[int] = set()
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        if raw.strip() == "":
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise TranscriptParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
        idx = record.get("utterance_index")
        tag = record.get("tag")
        if not isinstance(idx, int) or idx < 0 or idx >= len(meeting):
            raise TranscriptParseError(f"utterance_index {idx!r} out of range", line=lineno)
        if idx in seen:
            raise TranscriptParseError(f"duplicate label for utterance_index {idx}", line=lineno)
        seen.add(idx)
        labels.append(DecisionLabel(utterance_id=meeting.utterances[idx].id, tag=tag, source=source))
    return labels


@dataclass
class DecisionItem:
    """A decision served to reviewers: the original utterance paired with
    its self-contained written-form rewrite, plus provenance."""

    id: str
    meeting_id: str
    utterance_id: str
    original_text: str
    rewritten_text: str
    degraded: bool = False  # rewrite fell back to the original text
    created_at: str = ""
    context_token_count: int = 0
    detector_version: str = ""
    rewriter_version: str = ""

    def __post_init__(self):
        if not self.rewritten_text:
            raise ContractError("rewritten_text must be nonempty")


# Defaults approximate the corpus proportions the tagging scheme was developed
# on (~86/10/5 by utterance count); always configurable.
DEFAULT_SPLIT_RATIOS = (0.86, 0.09, 0.05)


def split_by_meeting(
    meetings: Sequence[Meeting | str],
    ratios: tuple[float, float, float] = DEFAULT_SPLIT_RATIOS,
    seed: int = 0,
) -> DatasetSplit:
    """Partition meetings into train/validation/test sets, by whole meetings.

    Deterministic for a fixed seed. Ratios must be nonnegative and sum to 1;
    set sizes are the rounded-down shares with leftovers assigned to train.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ConfigError(f"ratios must be three nonnegative fractions, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must sum to 1, got sum {sum(ratios)}")
    ids = [m.id if isinstance(m, Meeting) else m for m in meetings]
    if len(set(ids)) != len(ids):
        raise ContractError("duplicate meeting ids")
    if all(r > 0 for r in ratios) and len(ids) < 3:
        raise ContractError("need at least 3 meetings when all ratios are positive")

    rng = random.Random(seed)
    shuffled = sorted(ids)
    rng.shuffle(shuffled)
    n = len(shuffled)
    n_val = int(n * ratios[1])
    n_test = int(n * ratios[2])
    # give validation/test at least one meeting each when their ratio is positive
    if ratios[1] > 0 and n_val == 0:
        n_val = 1
    if ratios[2] > 0 and n_test == 0:
        n_test = 1
    n_train = n - n_val - n_test
    if n_train < 0:
        raise ContractError(f"cannot split {n} meetings with ratios {ratios}")
    return DatasetSplit(
        train=set(shuffled[:n_train]),
        validation=set(shuffled[n_train : n_train + n_val]),
        test=set(shuffled[n_train + n_val :]),
    )


def cohen_kappa(labels_a: Sequence[str], labels_b: Sequence[str]) -> float:
    """Chance-corrected agreement between two tag sequences.

    kappa = (p_o - p_e) / (1 - p_e). When p_e = 1 (both sequences constant and
    equal, the 0/0 case) returns 1.0 by convention.
    """
    if len(labels_a) != len(labels_b):
        raise ContractError(f"length mismatch: {len(labels_a)} vs {len(labels_b)}")
    if len(labels_a) == 0:
        raise ContractError("label sequences must be nonempty")
    n = len(labels_a)
    observed = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    classes = set(labels_a) | set(labels_b)
    expected = 0.0
    for c in classes:
        pa = sum(1 for a in labels_a if a == c) / n
        pb = sum(1 for b in labels_b if b == c) / n
        expected += pa * pb
    if abs(1.0 - expected) < 1e-12:
        # both raters constant on the same class; perfect agreement by convention
        return 1.0
    return (observed - expected) / (1.0 - expected)
