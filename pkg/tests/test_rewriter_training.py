"""Rewriter training mechanics on a tiny sample set: logs, mode handling,
determinism, item construction, and checkpoint round trips."""

import pytest

from dectrack.corpus import NON_TD, TD, DecisionLabel, Meeting, Utterance
from dectrack.errors import ConfigError, ContractError
from dectrack.rewriter import (
    MODE_JOINT,
    MODE_WRITER_ONLY,
    RewriteExample,
    RewriterConfig,
    RewriterModel,
    assemble_rewriter_input,
    build_seq2seq_backend_for_corpus,
    derive_picker_labels,
    load_rewriter,
    rewrite,
    save_rewriter,
    train_rewriter,
)
from dectrack.synthetic import rewriter_corpus_texts, rewriter_toy_samples


def to_example(sample, tokenizer, with_picker=True):
    built = assemble_rewriter_input(sample.context_texts, sample.decision_text, tokenizer)
    labels = None
    if with_picker:
        labels = derive_picker_labels(built.context_texts, built.decision_text, sample.gold_rewrite)
    return RewriteExample(input=built, gold_rewrite=sample.gold_rewrite, picker_labels=labels)


def small_setup(with_picker=True, epochs=2, seed=1):
    samples = rewriter_toy_samples(36, seed=29)
    backend = build_seq2seq_backend_for_corpus(
        rewriter_corpus_texts(samples[:30]), hidden_size=32, num_layers=1, num_heads=2, ffn_dim=64, seed=2
    )
    train_ex = [to_example(s, backend.tokenizer, with_picker) for s in samples[:30]]
    val_ex = [to_example(s, backend.tokenizer, with_picker) for s in samples[30:]]
    config = RewriterConfig(epochs=epochs, learning_rate=3e-4, batch_size=16, seed=seed, val_every=1)
    return samples, backend, train_ex, val_ex, config


def toy_meeting_with_decision():
    texts = [
        "the alpha report is almost finished",
        "someone should check it before friday",
        "okay we will check it on monday",
    ]
    utterances = [
        Utterance(id=f"m:u{i}", index=i, speaker="A", text=t) for i, t in enumerate(texts)
    ]
    meeting = Meeting(id="m", title="sync", utterances=utterances)
    label = DecisionLabel(utterance_id="m:u2", tag=TD, source="predicted")
    return meeting, label


class TestTrainingLoop:
    def test_joint_log_shape(self):
        _, backend, train_ex, val_ex, config = small_setup()
        model, log = train_rewriter(train_ex, val_ex, config, backend)
        assert len(log.records) == config.epochs
        assert 0 <= log.best_epoch < config.epochs
        for record in log.records:
            assert record.train_loss > 0
            assert record.gen_loss > 0
            assert record.picker_loss is not None
            assert record.val_rouge1 is not None

    def test_writer_only_has_no_picker_loss(self):
        _, backend, train_ex, val_ex, config = small_setup(with_picker=False)
        model, log = train_rewriter(train_ex, val_ex, config, backend, mode=MODE_WRITER_ONLY)
        assert model.mode == MODE_WRITER_ONLY
        assert all(r.picker_loss is None for r in log.records)

    def test_val_cadence_controls_scoring(self):
        _, backend, train_ex, val_ex, config = small_setup(epochs=3)
        config = RewriterConfig(epochs=3, learning_rate=3e-4, batch_size=16, seed=1, val_every=2)
        _, log = train_rewriter(train_ex, val_ex, config, backend)
        scored = [r.epoch for r in log.records if r.val_rouge1 is not None]
        assert scored == [1, 2]

    def test_empty_sets_rejected(self):
        _, backend, train_ex, val_ex, config = small_setup()
        with pytest.raises(ConfigError):
            train_rewriter([], val_ex, config, backend)
        with pytest.raises(ConfigError):
            train_rewriter(train_ex, [], config, backend)

    def test_joint_mode_requires_picker_labels(self):
        _, backend, train_ex, val_ex, config = small_setup(with_picker=False)
        with pytest.raises(ContractError) as err:
            train_rewriter(train_ex, val_ex, config, backend, mode=MODE_JOINT)
        assert "picker labels" in str(err.value)

    def test_same_seed_reproduces_losses_and_decodes(self):
        _, backend_a, train_a, val_a, config = small_setup()
        model_a, log_a = train_rewriter(train_a, val_a, config, backend_a)
        _, backend_b, train_b, val_b, config_b = small_setup()
        model_b, log_b = train_rewriter(train_b, val_b, config_b, backend_b)
        assert [r.train_loss for r in log_a.records] == [r.train_loss for r in log_b.records]
        assert model_a.decode_beam(val_a[0].input) == model_b.decode_beam(val_b[0].input)


class TestDecoding:
    def test_beam_width_one_matches_greedy(self):
        _, backend, train_ex, val_ex, _ = small_setup()
        config = RewriterConfig(epochs=2, learning_rate=3e-4, batch_size=16, seed=1, beam_width=1)
        model, _ = train_rewriter(train_ex, val_ex, config, backend)
        for example in val_ex[:4]:
            greedy = model.decode_greedy([example.input])[0]
            assert model.decode_beam(example.input) == greedy

    def test_decode_beam_deterministic(self):
        _, backend, train_ex, val_ex, config = small_setup()
        model, _ = train_rewriter(train_ex, val_ex, config, backend)
        first = [model.decode_beam(ex.input) for ex in val_ex]
        second = [model.decode_beam(ex.input) for ex in val_ex]
        assert first == second


class TestRewrite:
    def test_non_td_label_rejected(self):
        _, backend, _, _, config = small_setup()
        model = RewriterModel(backend, config)
        meeting, label = toy_meeting_with_decision()
        bad = DecisionLabel(utterance_id=label.utterance_id, tag=NON_TD, source="predicted")
        with pytest.raises(ContractError):
            rewrite(meeting, bad, model)

    def test_item_fields_from_decode(self, monkeypatch):
        _, backend, _, _, config = small_setup()
        model = RewriterModel(backend, config)
        monkeypatch.setattr(model, "decode_beam", lambda built: "we will check the alpha report on monday")
        meeting, label = toy_meeting_with_decision()
        item = rewrite(meeting, label, model)
        assert item.meeting_id == "m"
        assert item.utterance_id == "m:u2"
        assert item.original_text == "okay we will check it on monday"
        assert item.rewritten_text == "we will check the alpha report on monday"
        assert item.degraded is False
        assert item.context_token_count > 0
        assert item.rewriter_version.startswith(f"{MODE_JOINT}:word-v1:")

    def test_empty_decode_falls_back_degraded(self, monkeypatch):
        _, backend, _, _, config = small_setup()
        model = RewriterModel(backend, config)
        monkeypatch.setattr(model, "decode_beam", lambda built: "   ")
        meeting, label = toy_meeting_with_decision()
        item = rewrite(meeting, label, model)
        assert item.degraded is True
        assert item.rewritten_text == "okay we will check it on monday"

    def test_explicit_version_string_wins(self, monkeypatch):
        _, backend, _, _, config = small_setup()
        model = RewriterModel(backend, config)
        monkeypatch.setattr(model, "decode_beam", lambda built: "done")
        meeting, label = toy_meeting_with_decision()
        item = rewrite(meeting, label, model, rewriter_version="r-2024.1")
        assert item.rewriter_version == "r-2024.1"


class TestCheckpoint:
    def test_save_load_round_trip(self, tmp_path):
        _, backend, train_ex, val_ex, config = small_setup()
        model, _ = train_rewriter(train_ex, val_ex, config, backend)
        path = tmp_path / "rewriter.pt"
        sidecar = save_rewriter(model, path)
        assert sidecar.exists()
        loaded = load_rewriter(path)
        assert loaded.mode == model.mode
        assert loaded.config.to_dict() == model.config.to_dict()
        for example in val_ex[:4]:
            assert loaded.decode_beam(example.input) == model.decode_beam(example.input)

    def test_sidecar_metadata_fields(self, tmp_path):
        import json

        _, backend, train_ex, val_ex, config = small_setup(epochs=1)
        model, _ = train_rewriter(train_ex, val_ex, config, backend)
        sidecar = save_rewriter(model, tmp_path / "r.pt")
        meta = json.loads(sidecar.read_text())
        assert meta["mode"] == MODE_JOINT
        assert meta["beam_width"] == 5
        assert meta["context_budget_tokens"] == 360
        assert meta["tokenizer_fingerprint"].startswith("word-v1:")


class TestConfigValidation:
    def test_bad_values_rejected(self):
        with pytest.raises(ConfigError):
            RewriterConfig(context_budget_tokens=0)
        with pytest.raises(ConfigError):
            RewriterConfig(beam_width=0)
        with pytest.raises(ConfigError):
            RewriterConfig(val_every=0)
        with pytest.raises(ConfigError):
            RewriterConfig(picker_loss_weight=-0.5)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            RewriterConfig.from_dict({"epochs": 3, "bogus": True})
