"""Encoder input assembly for windows.

Layout: [CLS] tokens(u_1) [SEP] tokens(u_2) [SEP] ... tokens(u_w) [SEP].
PAD slots contribute no content tokens but keep their [SEP], so every input
carries exactly w separator tokens no matter how the window is padded or
truncated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ContractError
from ..tokenizer import CLS, SEP, WordTokenizer
from .windows import Window


@dataclass
class DetectorInput:
    token_ids: list[int]
    sep_positions: list[int]  # one per utterance slot, in window order
    attention_mask: list[int]
    target_pos: int
    warnings: list[str] = field(default_factory=list)

    @property
    def target_sep_position(self) -> int:
        return self.sep_positions[self.target_pos]


def assemble_detector_input(
    window: Window,
    tokenizer: WordTokenizer,
    max_length: int,
) -> DetectorInput:
    """Serialize a window into encoder token ids under a length budget.

    Overlong inputs lose content tokens left to right (oldest utterance
    first); the target utterance is only ever truncated last, from its tail,
    and doing so emits a warning record.
    """
    cls_id = tokenizer.token_id(CLS)
    sep_id = tokenizer.token_id(SEP)
    slot_tokens: list[list[int]] = []
    for utt, is_pad in zip(window.utterances, window.pad_mask):
        slot_tokens.append([] if is_pad else tokenizer.encode(utt.text))

    w = window.size
    warnings: list[str] = []
    budget = max_length - 1 - w  # room for content after [CLS] and w [SEP]s
    if budget < 0:
        raise ContractError(f"max_length {max_length} cannot hold [CLS] plus {w} [SEP] tokens")
    overflow = sum(len(toks) for toks in slot_tokens) - budget
    if overflow > 0:
        for pos in range(w):
            if pos == window.target_pos:
                continue
            drop = min(overflow, len(slot_tokens[pos]))
            if drop:
                slot_tokens[pos] = slot_tokens[pos][drop:]
                overflow -= drop
            if overflow == 0:
                break
        if overflow > 0:
            target_tokens = slot_tokens[window.target_pos]
            slot_tokens[window.target_pos] = target_tokens[: len(target_tokens) - overflow]
            warnings.append(
                f"target utterance truncated to fit max_length={max_length} "
                f"(dropped {overflow} tail tokens)"
            )

    token_ids = [cls_id]
    sep_positions = []
    for toks in slot_tokens:
        token_ids.extend(toks)
        token_ids.append(sep_id)
        sep_positions.append(len(token_ids) - 1)

    assert len(sep_positions) == w
    assert len(token_ids) <= max_length
    return DetectorInput(
        token_ids=token_ids,
        sep_positions=sep_positions,
        attention_mask=[1] * len(token_ids),
        target_pos=window.target_pos,
        warnings=warnings,
    )
