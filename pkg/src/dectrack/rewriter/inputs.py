"""Serialized rewriter inputs and heuristic picker supervision.

Layout: tokens(u_1) [X1] tokens(u_2) [X1] ... tokens(u_{n-1}) [X1]
tokens(u_n) [X2] EOS, where u_n is the decision utterance and the rest are
its context. Exactly one [X1] per context utterance, one [X2], EOS last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..corpus import Meeting, Utterance
from ..errors import ContractError
from ..tokenizer import EOS, X1, X2, WordTokenizer, word_split
from .context import assemble_context


@dataclass
class RewriterInput:
    token_ids: list[int]
    # positions of context content tokens within token_ids ([X1] markers excluded);
    # picker labels align with these positions one to one
    context_token_positions: list[int]
    context_texts: list[str]
    decision_text: str

    @property
    def context_token_count(self) -> int:
        return len(self.context_token_positions)


def assemble_rewriter_input(
    context: Sequence[Utterance | str],
    decision: Utterance | str,
    tokenizer: WordTokenizer,
) -> RewriterInput:
    """Serialize context + decision into the marked token layout."""
    x1_id = tokenizer.token_id(X1)
    x2_id = tokenizer.token_id(X2)
    eos_id = tokenizer.token_id(EOS)
    context_texts = [u.text if isinstance(u, Utterance) else u for u in context]
    decision_text = decision.text if isinstance(decision, Utterance) else decision
    if not decision_text.strip():
        raise ContractError("decision utterance must be nonempty")

    token_ids: list[int] = []
    positions: list[int] = []
    for text in context_texts:
        content = tokenizer.encode(text)
        positions.extend(range(len(token_ids), len(token_ids) + len(content)))
        token_ids.extend(content)
        token_ids.append(x1_id)
    token_ids.extend(tokenizer.encode(decision_text))
    token_ids.append(x2_id)
    token_ids.append(eos_id)

    assert token_ids.count(x1_id) == len(context_texts)
    assert token_ids.count(x2_id) == 1
    assert token_ids[-1] == eos_id
    return RewriterInput(
        token_ids=token_ids,
        context_token_positions=positions,
        context_texts=context_texts,
        decision_text=decision_text,
    )


def derive_picker_labels(context_texts: Sequence[str], decision_text: str, gold_rewrite: str) -> list[int]:
    """Salience per context token: 1 iff the word surfaces in the gold
    rewrite but not in the decision utterance (it had to come from context)."""
    decision_words = set(word_split(decision_text))
    rewrite_words = set(word_split(gold_rewrite))
    labels: list[int] = []
    for text in context_texts:
        for word in word_split(text):
            labels.append(int(word in rewrite_words and word not in decision_words))
    return labels


@dataclass
class RewriteExample:
    input: RewriterInput
    gold_rewrite: str
    picker_labels: list[int] | None = None

    def __post_init__(self):
        if not self.gold_rewrite.strip():
            raise ContractError("gold_rewrite must be nonempty")
        if self.picker_labels is not None and len(self.picker_labels) != self.input.context_token_count:
            raise ContractError(
                f"picker_labels length {len(self.picker_labels)} != "
                f"context token count {self.input.context_token_count}"
            )


def build_example(
    meeting: Meeting,
    decision_index: int,
    gold_rewrite: str,
    tokenizer: WordTokenizer,
    budget: int,
) -> RewriteExample:
    """Assemble one training example with heuristically derived picker labels."""
    context = assemble_context(meeting, decision_index, budget, tokenizer)
    built = assemble_rewriter_input(context, meeting.utterances[decision_index], tokenizer)
    labels = derive_picker_labels(built.context_texts, built.decision_text, gold_rewrite)
    return RewriteExample(input=built, gold_rewrite=gold_rewrite, picker_labels=labels)
