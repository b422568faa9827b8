"""Context assembly for rewriting: preceding utterances under a token budget.

The rewrite conditions on the dialogue leading up to the decision utterance.
Context is the maximal suffix of preceding utterances whose combined token
count fits the budget; utterances are kept whole, so the first one that
would overflow ends the suffix. If even the nearest preceding utterance is
too long on its own, its tail is cut so some context survives.
"""

from __future__ import annotations

import dataclasses

from ..corpus import Meeting, Utterance
from ..errors import ConfigError, ContractError
from ..tokenizer import WordTokenizer


def _truncate_to_budget(utterance: Utterance, budget: int, tokenizer: WordTokenizer) -> Utterance | None:
    """Longest whitespace-word prefix of the text that fits the token budget."""
    words = utterance.text.split()
    lo, hi = 0, len(words)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if len(tokenizer.encode(" ".join(words[:mid]))) <= budget:
            lo = mid
        else:
            hi = mid - 1
    if lo == 0:
        return None
    return dataclasses.replace(utterance, text=" ".join(words[:lo]))


def assemble_context(
    meeting: Meeting,
    decision_index: int,
    budget: int,
    tokenizer: WordTokenizer,
) -> list[Utterance]:
    """Preceding utterances for a decision, newest-first selection,
    returned in chronological order. decision_index 0 yields no context."""
    if budget < 1:
        raise ConfigError(f"context budget must be >= 1, got {budget}")
    if decision_index < 0 or decision_index >= len(meeting):
        raise ContractError(f"decision_index {decision_index} outside meeting of {len(meeting)} utterances")
    selected: list[Utterance] = []
    used = 0
    for idx in range(decision_index - 1, -1, -1):
        utt = meeting.utterances[idx]
        cost = len(tokenizer.encode(utt.text))
        if used + cost > budget:
            break
        selected.append(utt)
        used += cost
    if not selected and decision_index > 0:
        truncated = _truncate_to_budget(meeting.utterances[decision_index - 1], budget, tokenizer)
        if truncated is not None:
            selected.append(truncated)
    selected.reverse()
    return selected
