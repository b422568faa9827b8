"""Window construction: boundaries, coverage, and gold-tag attachment."""

import time

import pytest

from dectrack.corpus import NON_TD, TD, DecisionLabel, Meeting, Utterance
from dectrack.detector.windows import Window, attach_gold_tags, build_windows, tags_from_labels
from dectrack.errors import ConfigError, ContractError

from property_helpers import check_window_coverage, toy_meeting


class TestBuildWindows:
    def test_mid_meeting_window_spans_three_back_one_ahead(self):
        meeting = toy_meeting(10)
        windows = build_windows(meeting, window_size=5)
        win = windows[4]
        assert [u.index for u in win.utterances] == [1, 2, 3, 4, 5]
        assert win.target_pos == 3
        assert win.target.index == 4
        assert win.pad_mask == [False] * 5

    def test_single_utterance_meeting_pads_both_sides(self):
        meeting = toy_meeting(1)
        windows = build_windows(meeting, window_size=5)
        assert len(windows) == 1
        win = windows[0]
        assert win.pad_mask == [True, True, True, False, True]
        assert win.target_pos == 3
        assert win.target.id == "m:u0"
        assert all(u.text == "" for u, pad in zip(win.utterances, win.pad_mask) if pad)

    def test_stride_one_gives_one_window_per_utterance(self):
        meeting = toy_meeting(7)
        windows = build_windows(meeting, window_size=5, stride=1)
        assert len(windows) == 7
        assert [w.target.index for w in windows] == list(range(7))

    def test_last_window_pads_the_lookahead_slot(self):
        meeting = toy_meeting(6)
        win = build_windows(meeting, window_size=5)[-1]
        assert win.target.index == 5
        assert win.pad_mask == [False, False, False, False, True]

    def test_stride_two_skips_alternate_targets(self):
        meeting = toy_meeting(7)
        windows = build_windows(meeting, window_size=5, stride=2)
        assert [w.target.index for w in windows] == [0, 2, 4, 6]

    def test_window_size_below_two_rejected(self):
        with pytest.raises(ConfigError):
            build_windows(toy_meeting(3), window_size=1)

    def test_zero_stride_rejected(self):
        with pytest.raises(ConfigError):
            build_windows(toy_meeting(3), window_size=5, stride=0)

    def test_empty_meeting_rejected(self):
        meeting = Meeting(id="m", title="", utterances=[])
        with pytest.raises(ContractError):
            build_windows(meeting, window_size=5)


class TestWindowValidation:
    def test_target_slot_must_not_be_pad(self):
        meeting = toy_meeting(2)
        with pytest.raises(ContractError):
            Window(
                utterances=list(meeting.utterances),
                target_pos=0,
                pad_mask=[True, False],
            )

    def test_interior_pad_rejected(self):
        from dectrack.corpus import pad_utterance

        meeting = toy_meeting(2)
        with pytest.raises(ContractError):
            Window(
                utterances=[meeting.utterances[0], pad_utterance(), meeting.utterances[1]],
                target_pos=2,
                pad_mask=[False, True, False],
            )

    def test_pad_mask_length_checked(self):
        meeting = toy_meeting(3)
        with pytest.raises(ContractError):
            Window(utterances=list(meeting.utterances), target_pos=1, pad_mask=[False, False])


class TestGoldTags:
    def test_tags_follow_slots_and_pads_stay_none(self):
        meeting = toy_meeting(3)
        tags = {0: TD, 1: NON_TD, 2: TD}
        windows = attach_gold_tags(build_windows(meeting, window_size=5), tags)
        assert windows[0].pad_mask == [True, True, True, False, False]
        for win in windows:
            for slot, (utt, pad) in enumerate(zip(win.utterances, win.pad_mask)):
                if pad:
                    assert win.tags[slot] is None
                else:
                    assert win.tags[slot] == tags[utt.index]
        assert windows[1].target_tag == NON_TD

    def test_missing_tag_is_a_contract_error(self):
        meeting = toy_meeting(3)
        windows = build_windows(meeting, window_size=5)
        with pytest.raises(ContractError):
            attach_gold_tags(windows, {0: TD, 1: NON_TD})

    def test_tags_from_labels_maps_ids_to_indices(self):
        meeting = toy_meeting(3)
        labels = [
            DecisionLabel(utterance_id="m:u2", tag=TD),
            DecisionLabel(utterance_id="m:u0", tag=NON_TD),
        ]
        assert tags_from_labels(meeting, labels) == {2: TD, 0: NON_TD}


class TestCoverageProperty:
    def test_thousand_random_meetings_cover_every_utterance_once(self):
        started = time.monotonic()
        violations = check_window_coverage(case_count=1000)
        elapsed = time.monotonic() - started
        assert violations == []
        assert elapsed < 10.0, f"coverage property took {elapsed:.1f}s"
