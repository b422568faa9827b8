"""Encoder input assembly: layout, padding, truncation, golden fixtures."""

import json
import random
from pathlib import Path

import pytest

from dectrack.detector.inputs import assemble_detector_input
from dectrack.errors import ContractError
from dectrack.tokenizer import CLS, ENCODER_SPECIALS, SEP, WordTokenizer

from property_helpers import window_from_texts

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_tokenizer() -> WordTokenizer:
    payload = json.loads((FIXTURES / "detector_inputs.json").read_text())
    return WordTokenizer(payload["tokenizer_words"], ENCODER_SPECIALS)


class TestLayout:
    def test_two_utterances_one_token_each(self):
        tok = fixture_tokenizer()
        win = window_from_texts(["a", "b"], target_pos=0)
        built = assemble_detector_input(win, tok, max_length=32)
        assert built.token_ids == [
            tok.token_id(CLS),
            tok.encode("a")[0],
            tok.token_id(SEP),
            tok.encode("b")[0],
            tok.token_id(SEP),
        ]
        assert built.sep_positions == [2, 4]
        assert built.attention_mask == [1] * 5

    def test_leading_pad_puts_sep_right_after_cls(self):
        tok = fixture_tokenizer()
        win = window_from_texts([None, "a b", "c"], target_pos=1)
        built = assemble_detector_input(win, tok, max_length=32)
        assert built.token_ids[0] == tok.token_id(CLS)
        assert built.token_ids[1] == tok.token_id(SEP)
        assert built.sep_positions[0] == 1

    def test_unknown_words_fall_back_to_unk(self):
        tok = fixture_tokenizer()
        win = window_from_texts(["zebra a", "b"], target_pos=0)
        built = assemble_detector_input(win, tok, max_length=32)
        assert built.token_ids[1] == tok.unk_id
        assert built.token_ids[2] == tok.encode("a")[0]

    def test_target_sep_position_property(self):
        tok = fixture_tokenizer()
        win = window_from_texts(["a", "b c", "d"], target_pos=1)
        built = assemble_detector_input(win, tok, max_length=32)
        assert built.target_sep_position == built.sep_positions[1]


class TestTruncation:
    def test_oldest_utterance_loses_tokens_first(self):
        tok = fixture_tokenizer()
        win = window_from_texts(["a b c d", "e f", "g h"], target_pos=1)
        built = assemble_detector_input(win, tok, max_length=9)
        # budget is 9 - 1 - 3 = 5 content tokens; three drop from u1's front
        assert tok.decode(built.token_ids) == "d e f g h"
        assert len(built.token_ids) == 9
        assert built.sep_positions == [2, 5, 8]
        assert built.warnings == []

    def test_target_tail_truncated_last_with_warning(self):
        tok = fixture_tokenizer()
        win = window_from_texts(["a b c d e", "f"], target_pos=0)
        built = assemble_detector_input(win, tok, max_length=6)
        assert tok.decode(built.token_ids) == "a b c"
        assert len(built.warnings) == 1
        assert "truncated" in built.warnings[0]

    def test_sep_count_survives_truncation(self):
        tok = fixture_tokenizer()
        sep_id = tok.token_id(SEP)
        win = window_from_texts(["a b c d e f g h", "a b c", "d e f"], target_pos=1)
        for max_length in range(4, 20):
            built = assemble_detector_input(win, tok, max_length=max_length)
            assert sum(1 for t in built.token_ids if t == sep_id) == 3
            assert len(built.token_ids) <= max_length

    def test_budget_smaller_than_frame_rejected(self):
        tok = fixture_tokenizer()
        win = window_from_texts(["a", "b"], target_pos=0)
        with pytest.raises(ContractError):
            assemble_detector_input(win, tok, max_length=2)


class TestGoldenFixtures:
    def test_layouts_match_checked_in_expectations(self):
        payload = json.loads((FIXTURES / "detector_inputs.json").read_text())
        tok = WordTokenizer(payload["tokenizer_words"], ENCODER_SPECIALS)
        assert len(payload["cases"]) == 5
        for case in payload["cases"]:
            win = window_from_texts(case["texts"], target_pos=case["target_pos"])
            built = assemble_detector_input(win, tok, max_length=case["max_length"])
            expected = case["expected"]
            assert built.token_ids == expected["token_ids"], case["name"]
            assert [tok.token(t) for t in built.token_ids] == expected["tokens"], case["name"]
            assert built.sep_positions == expected["sep_positions"], case["name"]
            assert len(built.warnings) == expected["warning_count"], case["name"]


class TestRandomizedInvariants:
    def test_assembled_inputs_keep_frame_and_mask_invariants(self):
        tok = fixture_tokenizer()
        sep_id = tok.token_id(SEP)
        words = ["a", "b", "c", "d", "e", "f", "g", "h"]
        rng = random.Random(99)
        for _ in range(200):
            w = rng.randint(2, 6)
            target_pos = w - 2
            lead_pads = rng.randint(0, target_pos)
            pad_tail = rng.random() < 0.3
            texts: list[str | None] = []
            for slot in range(w):
                if slot < lead_pads or (pad_tail and slot == w - 1):
                    texts.append(None)
                else:
                    texts.append(" ".join(rng.choice(words) for _ in range(rng.randint(1, 6))))
            win = window_from_texts(texts, target_pos=target_pos)
            max_length = rng.randint(1 + w, 40)
            built = assemble_detector_input(win, tok, max_length=max_length)
            assert len(built.sep_positions) == w
            assert built.token_ids[-1] == sep_id
            assert len(built.token_ids) <= max_length
            assert built.attention_mask == [1] * len(built.token_ids)
            assert [built.token_ids[p] for p in built.sep_positions] == [sep_id] * w
