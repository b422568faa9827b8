"""Sliding-window construction over meeting transcripts.

Each window holds w consecutive utterance slots; the prediction target sits
second from the back (slot w-2, 0-based). Sliding with stride 1 therefore
yields one window per utterance with one trailing utterance of lookahead,
and boundary windows are completed with PAD slots so the first and last
utterances get predictions too.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..corpus import Meeting, Utterance, pad_utterance
from ..errors import ConfigError, ContractError


@dataclass
class Window:
    utterances: list[Utterance]
    target_pos: int
    pad_mask: list[bool]  # True where the slot is PAD
    meeting_id: str = ""
    target_index: int = -1  # meeting-level index of the target utterance
    tags: list[str | None] | None = None  # per-slot gold tags, None on PAD slots

    def __post_init__(self):
        w = len(self.utterances)
        if len(self.pad_mask) != w:
            raise ContractError("pad_mask length must equal window size")
        if self.target_pos < 0 or self.target_pos >= w:
            raise ContractError(f"target_pos {self.target_pos} outside window of size {w}")
        if self.pad_mask[self.target_pos]:
            raise ContractError("target slot must never be PAD")
        if self.tags is not None and len(self.tags) != w:
            raise ContractError("tags length must equal window size")
        # PADs only at the edges
        interior = self.pad_mask[self._first_real() : self._last_real() + 1]
        if any(interior):
            raise ContractError("PAD slots must form a contiguous prefix or suffix")

    def _first_real(self) -> int:
        return next(i for i, pad in enumerate(self.pad_mask) if not pad)

    def _last_real(self) -> int:
        return len(self.pad_mask) - 1 - next(i for i, pad in enumerate(reversed(self.pad_mask)) if not pad)

    @property
    def size(self) -> int:
        return len(self.utterances)

    @property
    def target(self) -> Utterance:
        return self.utterances[self.target_pos]

    @property
    def target_tag(self) -> str | None:
        return self.tags[self.target_pos] if self.tags is not None else None


def build_windows(meeting: Meeting, window_size: int = 5, stride: int = 1) -> list[Window]:
    """One window per targeted utterance; stride 1 covers every utterance.

    The window whose target is utterance t spans meeting indices
    t-(w-2) .. t+1, padded where those fall outside the transcript.
    """
    if window_size < 2:
        raise ConfigError(f"window_size must be >= 2, got {window_size}")
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    if len(meeting) == 0:
        raise ContractError("meeting has no utterances")
    target_pos = window_size - 2
    n = len(meeting)
    windows = []
    for t in range(0, n, stride):
        slots: list[Utterance] = []
        pad_mask: list[bool] = []
        for offset in range(window_size):
            idx = t - target_pos + offset
            if 0 <= idx < n:
                slots.append(meeting.utterances[idx])
                pad_mask.append(False)
            else:
                slots.append(pad_utterance())
                pad_mask.append(True)
        windows.append(
            Window(
                utterances=slots,
                target_pos=target_pos,
                pad_mask=pad_mask,
                meeting_id=meeting.id,
                target_index=t,
            )
        )
    return windows


def tags_from_labels(meeting: Meeting, labels) -> dict[int, str]:
    """Map meeting-level utterance index -> tag for a label set."""
    return {meeting.utterance_by_id(label.utterance_id).index: label.tag for label in labels}


def attach_gold_tags(windows: list[Window], tags_by_index: dict[int, str]) -> list[Window]:
    """Fill per-slot gold tags from a meeting-index -> tag map (PAD slots stay None)."""
    for window in windows:
        slot_tags: list[str | None] = []
        for utt, is_pad in zip(window.utterances, window.pad_mask):
            if is_pad:
                slot_tags.append(None)
            else:
                if utt.index not in tags_by_index:
                    raise ContractError(f"missing gold tag for utterance index {utt.index}")
                slot_tags.append(tags_by_index[utt.index])
        window.tags = slot_tags
    return windows
