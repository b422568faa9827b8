"""Shared builders and property checks used by unit and acceptance tests."""

from __future__ import annotations

import random

from dectrack.corpus import Meeting, Utterance, pad_utterance
from dectrack.detector.inputs import assemble_detector_input
from dectrack.detector.windows import Window, build_windows
from dectrack.tokenizer import SEP, WordTokenizer


def toy_meeting(n: int, meeting_id: str = "m", vocab_size: int = 40, seed: int = 0) -> Meeting:
    rng = random.Random(seed)
    utterances = [
        Utterance(
            id=f"{meeting_id}:u{i}",
            index=i,
            speaker=f"s{i % 3}",
            text=" ".join(f"w{rng.randrange(vocab_size)}" for _ in range(rng.randint(1, 3))),
        )
        for i in range(n)
    ]
    return Meeting(id=meeting_id, title="toy", utterances=utterances)


def window_from_texts(texts: list[str | None], target_pos: int, meeting_id: str = "m") -> Window:
    """Build a window directly from slot texts; None marks a PAD slot."""
    slots = []
    pad_mask = []
    for i, text in enumerate(texts):
        if text is None:
            slots.append(pad_utterance())
            pad_mask.append(True)
        else:
            slots.append(Utterance(id=f"{meeting_id}:u{i}", index=i, speaker="s", text=text))
            pad_mask.append(False)
    return Window(
        utterances=slots,
        target_pos=target_pos,
        pad_mask=pad_mask,
        meeting_id=meeting_id,
        target_index=target_pos,
    )


def check_window_coverage(case_count: int = 1000, seed: int = 20240718, max_n: int = 200) -> list[str]:
    """Randomized coverage check; returns one message per violation.

    For every case: n utterances, w in 2..9, stride 1. Requires exactly n
    windows, every utterance as target exactly once, and exactly w [SEP]
    tokens in each assembled input.
    """
    rng = random.Random(seed)
    tokenizer = WordTokenizer.train(f"w{i}" for i in range(40))
    sep_id = tokenizer.token_id(SEP)
    violations: list[str] = []
    for case in range(case_count):
        n = rng.randint(1, max_n)
        w = rng.randint(2, 9)
        meeting = toy_meeting(n, meeting_id=f"m{case}", seed=case)
        windows = build_windows(meeting, window_size=w, stride=1)
        if len(windows) != n:
            violations.append(f"case {case}: expected {n} windows, got {len(windows)}")
            continue
        target_ids = [win.target.id for win in windows]
        if sorted(target_ids) != sorted(u.id for u in meeting.utterances):
            violations.append(f"case {case}: target multiset does not equal the utterance set")
        if [win.target_index for win in windows] != list(range(n)):
            violations.append(f"case {case}: target indices not 0..n-1 in order")
        for win in windows:
            built = assemble_detector_input(win, tokenizer, max_length=64)
            seps = sum(1 for t in built.token_ids if t == sep_id)
            if seps != w:
                violations.append(f"case {case}: window {win.target_index} has {seps} SEPs, want {w}")
                break
    return violations
