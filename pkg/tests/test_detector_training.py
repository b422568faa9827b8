"""Detector training mechanics on a very small corpus: logs, determinism,
thresholding, evaluation contracts, and checkpoint round trips."""

import torch
import pytest

from dectrack.corpus import NON_TD, TD, DecisionLabel
from dectrack.detector import (
    DetectorConfig,
    DetectorModel,
    attach_gold_tags,
    build_backend_for_corpus,
    build_windows,
    evaluate_tags,
    load_detector,
    predict_tags,
    save_detector,
    train_detector,
)
from dectrack.detector.training import class_weights
from dectrack.errors import ConfigError, ContractError, ImbalanceError
from dectrack.synthetic import detector_corpus_texts, detector_toy_corpus


def small_setup(mode="SL", epochs=2, seed=1):
    corpus = detector_toy_corpus(meetings=6, utterances_low=22, utterances_high=28, positive_rate=0.1, seed=13)
    config = DetectorConfig(mode=mode, epochs=epochs, learning_rate=3e-4, seed=seed, positive_weight=5.0)
    backend = build_backend_for_corpus(
        detector_corpus_texts(corpus), hidden_size=32, num_layers=1, num_heads=2, ffn_dim=64, seed=2
    )
    train_w, val_w = [], []
    for i, (meeting, tags) in enumerate(corpus):
        bucket = val_w if i >= 5 else train_w
        bucket.extend(attach_gold_tags(build_windows(meeting, config.window_size), tags))
    return corpus, config, backend, train_w, val_w


def gold_for(meeting, tags):
    return [DecisionLabel(utterance_id=u.id, tag=tags[u.index]) for u in meeting.utterances]


class TestTrainingLoop:
    def test_log_shape_and_bounds(self):
        corpus, config, backend, train_w, val_w = small_setup(epochs=2)
        model, log = train_detector(train_w, val_w, config, backend)
        assert len(log.records) == 2
        assert 0 <= log.best_epoch < 2
        for record in log.records:
            assert record.train_loss > 0
            for value in (record.val_precision, record.val_recall, record.val_f1):
                assert 0.0 <= value <= 1.0

    def test_same_seed_reproduces_log_and_predictions(self):
        corpus, config, backend, train_w, val_w = small_setup()
        model_a, log_a = train_detector(train_w, val_w, config, backend)
        corpus2, config2, backend2, train_w2, val_w2 = small_setup()
        model_b, log_b = train_detector(train_w2, val_w2, config2, backend2)
        assert [r.train_loss for r in log_a.records] == [r.train_loss for r in log_b.records]
        meeting, _ = corpus[0]
        tags_a = [l.tag for l in predict_tags(meeting, model_a)]
        tags_b = [l.tag for l in predict_tags(meeting, model_b)]
        assert tags_a == tags_b

    def test_empty_window_lists_rejected(self):
        corpus, config, backend, train_w, val_w = small_setup()
        with pytest.raises(ContractError):
            train_detector([], val_w, config, backend)
        with pytest.raises(ContractError):
            train_detector(train_w, [], config, backend)


class TestPredictTags:
    def test_one_label_per_utterance(self):
        corpus, config, backend, train_w, val_w = small_setup()
        model = DetectorModel(backend, config)
        meeting, _ = corpus[0]
        labels = predict_tags(meeting, model)
        assert [l.utterance_id for l in labels] == [u.id for u in meeting.utterances]
        assert all(l.source == "predicted" for l in labels)
        assert all(l.tag in (TD, NON_TD) for l in labels)

    def test_scores_below_threshold_give_all_non_td(self):
        corpus, config, backend, _, _ = small_setup()
        model = DetectorModel(backend, config)
        final = model.head[-1]
        with torch.no_grad():
            final.weight.zero_()
            final.bias.copy_(torch.tensor([10.0, -10.0]))
        meeting, _ = corpus[0]
        assert all(l.tag == NON_TD for l in predict_tags(meeting, model))

    def test_scores_above_threshold_give_all_td(self):
        corpus, config, backend, _, _ = small_setup()
        model = DetectorModel(backend, config)
        final = model.head[-1]
        with torch.no_grad():
            final.weight.zero_()
            final.bias.copy_(torch.tensor([-10.0, 10.0]))
        meeting, _ = corpus[0]
        assert all(l.tag == TD for l in predict_tags(meeting, model))


class TestEvaluateTags:
    def test_perfect_agreement(self):
        gold = [DecisionLabel(f"m:u{i}", TD if i % 4 == 0 else NON_TD) for i in range(8)]
        prf = evaluate_tags(gold, gold)
        assert prf.precision == prf.recall == prf.f1 == 1.0

    def test_zero_predicted_positives(self):
        gold = [DecisionLabel("m:u0", TD), DecisionLabel("m:u1", NON_TD)]
        pred = [DecisionLabel("m:u0", NON_TD), DecisionLabel("m:u1", NON_TD)]
        prf = evaluate_tags(pred, gold)
        assert prf.precision == 0.0 and prf.recall == 0.0 and prf.f1 == 0.0

    def test_coverage_mismatch_lists_offenders(self):
        gold = [DecisionLabel("m:u0", TD), DecisionLabel("m:u1", NON_TD)]
        pred = [DecisionLabel("m:u0", TD), DecisionLabel("m:u2", NON_TD)]
        with pytest.raises(ContractError) as err:
            evaluate_tags(pred, gold)
        assert "m:u1" in str(err.value) and "m:u2" in str(err.value)

    def test_duplicate_ids_rejected(self):
        gold = [DecisionLabel("m:u0", TD), DecisionLabel("m:u0", TD)]
        with pytest.raises(ContractError):
            evaluate_tags(gold[:1], gold)


class TestClassWeights:
    def test_auto_uses_negative_positive_ratio(self):
        corpus, config, backend, train_w, _ = small_setup()
        weight = class_weights(train_w, config.__class__(mode="SC", positive_weight="auto"))
        tags = [w.target_tag for w in train_w]
        positives = sum(1 for t in tags if t == TD)
        expected = (len(tags) - positives) / positives
        assert weight is not None
        assert weight.tolist() == pytest.approx([1.0, expected])

    def test_numeric_weight_passthrough(self):
        corpus, config, backend, train_w, _ = small_setup()
        weight = class_weights(train_w, DetectorConfig(positive_weight=3.5))
        assert weight.tolist() == pytest.approx([1.0, 3.5])

    def test_disabled_weighting(self):
        corpus, config, backend, train_w, _ = small_setup()
        assert class_weights(train_w, DetectorConfig(positive_weight=None)) is None

    def test_no_positives_raises_imbalance_error(self):
        corpus, config, backend, _, _ = small_setup()
        meeting, _ = corpus[0]
        windows = attach_gold_tags(
            build_windows(meeting, 5), {i: NON_TD for i in range(len(meeting))}
        )
        with pytest.raises(ImbalanceError):
            class_weights(windows, DetectorConfig())


class TestCheckpoint:
    def test_save_load_round_trip(self, tmp_path):
        corpus, config, backend, train_w, val_w = small_setup(epochs=1)
        model, _ = train_detector(train_w, val_w, config, backend)
        path = tmp_path / "detector.pt"
        sidecar = save_detector(model, path)
        assert sidecar.exists()
        loaded = load_detector(path)
        meeting, _ = corpus[2]
        before = [l.tag for l in predict_tags(meeting, model)]
        after = [l.tag for l in predict_tags(meeting, loaded)]
        assert before == after
        assert loaded.config.to_dict() == model.config.to_dict()

    def test_sidecar_metadata_fields(self, tmp_path):
        import json

        corpus, config, backend, train_w, val_w = small_setup(epochs=1)
        model, _ = train_detector(train_w, val_w, config, backend)
        sidecar = save_detector(model, tmp_path / "d.pt")
        meta = json.loads(sidecar.read_text())
        assert meta["mode"] == "SL"
        assert meta["window_size"] == 5
        assert meta["threshold"] == 0.5
        assert meta["tokenizer_fingerprint"].startswith("word-v1:")


class TestConfigValidation:
    def test_bad_mode_rejected(self):
        with pytest.raises(ConfigError):
            DetectorConfig(mode="XX")

    def test_threshold_bounds(self):
        with pytest.raises(ConfigError):
            DetectorConfig(threshold=0.0)
        with pytest.raises(ConfigError):
            DetectorConfig(threshold=1.0)

    def test_window_size_minimum(self):
        with pytest.raises(ConfigError):
            DetectorConfig(window_size=1)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            DetectorConfig.from_dict({"window_size": 5, "bogus": 1})

    def test_target_pos_is_second_from_back(self):
        assert DetectorConfig(window_size=5).target_pos == 3
        assert DetectorConfig(window_size=2).target_pos == 0
