"""Command-line entry points: generate toy data, train and run both models,
augment windows, score rewrites, and serve the review API.

Commands print tab-separated key/value lines; train and score commands also
render CSV + PNG reports next to their outputs.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .augment import (
    AugmentationConfig,
    IdentityTranslator,
    TranslationCache,
    augment_positive_windows,
    read_windows_jsonl,
    write_windows_jsonl,
)
from .corpus import TD, DecisionLabel, Meeting, load_labels, parse_transcript, split_by_meeting
from .detector import (
    DetectorConfig,
    attach_gold_tags,
    build_backend_for_corpus,
    build_windows,
    evaluate_tags,
    load_detector,
    predict_tags,
    save_detector,
    tags_from_labels,
    train_detector,
)
from .errors import ContractError, DectrackError
from .metrics import ScoreSheet, aggregate_scores, evaluate_rewrites
from .rewriter import (
    MODE_JOINT,
    MODE_WRITER_ONLY,
    RewriteExample,
    RewriterConfig,
    assemble_rewriter_input,
    build_seq2seq_backend_for_corpus,
    derive_picker_labels,
    load_rewriter,
    rewrite,
    save_rewriter,
    train_rewriter,
)
from .synthetic import detector_corpus_texts, detector_toy_corpus, rewriter_toy_samples


def echo_kv(key: str, value) -> None:
    click.echo(f"{key}\t{value}")


def read_backend_config(path: str | None) -> dict:
    if path is None:
        return {}
    return json.loads(Path(path).read_text())


def read_detector_dir(data_dir: Path) -> list[tuple[Meeting, dict[int, str]]]:
    """Load meetings/*.jsonl transcripts with labels/*.jsonl files paired by stem."""
    meetings_dir = data_dir / "meetings"
    labels_dir = data_dir / "labels"
    if not meetings_dir.is_dir() or not labels_dir.is_dir():
        raise ContractError(f"{data_dir} must contain meetings/ and labels/ subdirectories")
    corpus = []
    for transcript_path in sorted(meetings_dir.glob("*.jsonl")):
        stem = transcript_path.stem
        label_path = labels_dir / f"{stem}.jsonl"
        if not label_path.exists():
            raise ContractError(f"no label file for meeting {stem!r}")
        with transcript_path.open("rb") as handle:
            meeting = parse_transcript(handle, meeting_id=stem, title=stem)
        with label_path.open("rb") as handle:
            labels = load_labels(handle, meeting)
        corpus.append((meeting, tags_from_labels(meeting, labels)))
    if not corpus:
        raise ContractError(f"no meetings found under {meetings_dir}")
    return corpus


def read_rewrite_samples(path: Path) -> list[dict]:
    samples = []
    with path.open() as handle:
        for lineno, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            record = json.loads(raw)
            for key in ("context_texts", "decision_text", "gold_rewrite"):
                if key not in record:
                    raise ContractError(f"{path}:{lineno} is missing {key!r}")
            samples.append(record)
    if not samples:
        raise ContractError(f"no samples in {path}")
    return samples


def read_lines(path: Path) -> list[str]:
    return [line.rstrip("\n") for line in path.read_text().splitlines()]


@click.group()
def cli():
    """Meeting decision tracking toolkit."""


# -- synthetic data -------------------------------------------------------


@cli.group()
def synth():
    """Generate toy corpora for training and smoke tests."""


@synth.command("detector")
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
@click.option("--meetings", type=int, default=30, show_default=True)
@click.option("--positive-rate", type=float, default=0.06, show_default=True)
@click.option("--seed", type=int, default=13, show_default=True)
def synth_detector(out_dir: Path, meetings: int, positive_rate: float, seed: int):
    """Write templated meeting transcripts plus gold decision labels."""
    corpus = detector_toy_corpus(meetings=meetings, positive_rate=positive_rate, seed=seed)
    meetings_dir = out_dir / "meetings"
    labels_dir = out_dir / "labels"
    meetings_dir.mkdir(parents=True, exist_ok=True)
    labels_dir.mkdir(parents=True, exist_ok=True)
    positives = 0
    utterances = 0
    for meeting, tags in corpus:
        with (meetings_dir / f"{meeting.id}.jsonl").open("w") as handle:
            for u in meeting.utterances:
                handle.write(json.dumps({"speaker": u.speaker, "text": u.text}) + "\n")
        with (labels_dir / f"{meeting.id}.jsonl").open("w") as handle:
            for index in range(len(meeting)):
                handle.write(json.dumps({"utterance_index": index, "tag": tags[index]}) + "\n")
        positives += sum(1 for tag in tags.values() if tag == TD)
        utterances += len(meeting)
    echo_kv("meetings", len(corpus))
    echo_kv("utterances", utterances)
    echo_kv("positives", positives)
    echo_kv("out_dir", out_dir)


@synth.command("rewrites")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--count", type=int, default=380, show_default=True)
@click.option("--seed", type=int, default=29, show_default=True)
def synth_rewrites(out_path: Path, count: int, seed: int):
    """Write elliptical decision utterances with self-contained gold rewrites."""
    samples = rewriter_toy_samples(count, seed=seed)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w") as handle:
        for sample in samples:
            handle.write(
                json.dumps(
                    {
                        "context_texts": sample.context_texts,
                        "decision_text": sample.decision_text,
                        "gold_rewrite": sample.gold_rewrite,
                    }
                )
                + "\n"
            )
    echo_kv("samples", len(samples))
    echo_kv("out", out_path)


# -- detector -------------------------------------------------------------


@cli.group()
def detector():
    """Train, run, and evaluate the decision-utterance detector."""


@detector.command("train")
@click.option("--data-dir", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--model-out", type=click.Path(path_type=Path), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--backend-config", type=click.Path(exists=True), default=None)
@click.option("--mode", type=click.Choice(["SL", "SC"]), default=None)
@click.option("--split-seed", type=int, default=0, show_default=True)
@click.option("--train-frac", type=float, default=0.8, show_default=True)
@click.option("--val-frac", type=float, default=0.1, show_default=True)
@click.option("--report-dir", type=click.Path(path_type=Path), default=None)
def detector_train(data_dir, model_out, config_path, backend_config, mode, split_seed, train_frac, val_frac, report_dir):
    """Train on a meetings/labels directory and save a checkpoint plus curves."""
    config = DetectorConfig.load(config_path) if config_path else DetectorConfig()
    if mode is not None:
        config = DetectorConfig.from_dict({**config.to_dict(), "mode": mode})
    corpus = read_detector_dir(data_dir)
    by_id = {meeting.id: (meeting, tags) for meeting, tags in corpus}
    split = split_by_meeting(
        sorted(by_id), ratios=(train_frac, val_frac, 1.0 - train_frac - val_frac), seed=split_seed
    )
    backend = build_backend_for_corpus(detector_corpus_texts(corpus), **read_backend_config(backend_config))

    def windows_for(ids):
        out = []
        for meeting_id in ids:
            meeting, tags = by_id[meeting_id]
            out.extend(attach_gold_tags(build_windows(meeting, config.window_size), tags))
        return out

    model, log = train_detector(windows_for(split.train), windows_for(split.validation), config, backend)
    model_out.parent.mkdir(parents=True, exist_ok=True)
    save_detector(model, model_out)
    best = log.records[log.best_epoch]
    echo_kv("mode", config.mode)
    echo_kv("epochs", config.epochs)
    echo_kv("best_epoch", log.best_epoch)
    echo_kv("val_f1", f"{best.val_f1:.4f}")
    echo_kv("model", model_out)

    from .report import render_detector_curves

    paths = render_detector_curves(log, report_dir or model_out.parent / "report")
    echo_kv("report_csv", paths.csv_path)
    echo_kv("report_figure", paths.figure_path)


@detector.command("predict")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--transcript", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def detector_predict(model_path, transcript, out_path):
    """Tag one transcript; writes one label line per utterance."""
    model = load_detector(model_path)
    with transcript.open("rb") as handle:
        meeting = parse_transcript(handle, meeting_id=transcript.stem, title=transcript.stem)
    labels = predict_tags(meeting, model)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w") as handle:
        for label in labels:
            utterance = meeting.utterance_by_id(label.utterance_id)
            handle.write(
                json.dumps(
                    {
                        "utterance_index": utterance.index,
                        "utterance_id": label.utterance_id,
                        "tag": label.tag,
                    }
                )
                + "\n"
            )
    echo_kv("utterances", len(labels))
    echo_kv("positives", sum(1 for l in labels if l.tag == TD))
    echo_kv("out", out_path)


@detector.command("eval")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--data-dir", type=click.Path(path_type=Path, exists=True), required=True)
def detector_eval(model_path, data_dir):
    """Report positive-class precision/recall/F1 over a labeled directory."""
    model = load_detector(model_path)
    corpus = read_detector_dir(data_dir)
    predicted = []
    gold = []
    for meeting, tags in corpus:
        predicted.extend(predict_tags(meeting, model))
        gold.extend(DecisionLabel(utterance_id=u.id, tag=tags[u.index]) for u in meeting.utterances)
    prf = evaluate_tags(predicted, gold)
    echo_kv("meetings", len(corpus))
    echo_kv("precision", f"{prf.precision:.4f}")
    echo_kv("recall", f"{prf.recall:.4f}")
    echo_kv("f1", f"{prf.f1:.4f}")


# -- augmentation ---------------------------------------------------------


@cli.command("augment")
@click.option("--in", "in_path", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--pivots", default=None, help="Comma-separated pivot language codes.")
@click.option("--cache-dir", type=click.Path(path_type=Path), default=None)
@click.option("--max-workers", type=int, default=1, show_default=True)
def augment_cmd(in_path, out_path, pivots, cache_dir, max_workers):
    """Back-translate positive windows from a JSONL window file.

    Uses the identity translation client; a network-backed client can be
    wired in through the library API.
    """
    windows = read_windows_jsonl(in_path)
    kwargs = {"max_workers": max_workers}
    if pivots:
        kwargs["pivot_langs"] = tuple(code.strip() for code in pivots.split(","))
    config = AugmentationConfig(**kwargs)
    cache = TranslationCache(cache_dir) if cache_dir else None
    result = augment_positive_windows(windows, config, IdentityTranslator(), cache=cache)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_windows_jsonl(result.windows, out_path)
    echo_kv("original", result.original_count)
    echo_kv("added", result.added)
    echo_kv("skipped", len(result.skips))
    echo_kv("out", out_path)


# -- rewriter -------------------------------------------------------------


@cli.group()
def rewriter():
    """Train and run the decision-utterance rewriter."""


@rewriter.command("train")
@click.option("--samples", "samples_path", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--model-out", type=click.Path(path_type=Path), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--backend-config", type=click.Path(exists=True), default=None)
@click.option(
    "--mode",
    type=click.Choice([MODE_JOINT, MODE_WRITER_ONLY]),
    default=MODE_JOINT,
    show_default=True,
)
@click.option("--val-frac", type=float, default=0.1, show_default=True)
@click.option("--report-dir", type=click.Path(path_type=Path), default=None)
def rewriter_train(samples_path, model_out, config_path, backend_config, mode, val_frac, report_dir):
    """Train on a JSONL sample file and save a checkpoint plus curves."""
    config = RewriterConfig.load(config_path) if config_path else RewriterConfig()
    records = read_rewrite_samples(samples_path)
    val_count = max(1, int(len(records) * val_frac))
    if val_count >= len(records):
        raise ContractError(f"validation fraction {val_frac} leaves no training samples")
    train_records, val_records = records[:-val_count], records[-val_count:]
    texts = rewriter_corpus_texts_from_records(train_records)
    backend = build_seq2seq_backend_for_corpus(texts, **read_backend_config(backend_config))

    def to_examples(rows):
        out = []
        for row in rows:
            built = assemble_rewriter_input(row["context_texts"], row["decision_text"], backend.tokenizer)
            labels = None
            if mode == MODE_JOINT:
                labels = derive_picker_labels(built.context_texts, built.decision_text, row["gold_rewrite"])
            out.append(RewriteExample(input=built, gold_rewrite=row["gold_rewrite"], picker_labels=labels))
        return out

    model, log = train_rewriter(to_examples(train_records), to_examples(val_records), config, backend, mode=mode)
    model_out.parent.mkdir(parents=True, exist_ok=True)
    save_rewriter(model, model_out)
    scored = [r for r in log.records if r.val_rouge1 is not None]
    echo_kv("mode", mode)
    echo_kv("train_samples", len(train_records))
    echo_kv("val_samples", len(val_records))
    echo_kv("best_epoch", log.best_epoch)
    echo_kv("val_rouge1", f"{max(r.val_rouge1 for r in scored):.4f}")
    echo_kv("model", model_out)

    from .report import render_rewriter_curves

    paths = render_rewriter_curves(log, report_dir or model_out.parent / "report")
    echo_kv("report_csv", paths.csv_path)
    echo_kv("report_figure", paths.figure_path)


def rewriter_corpus_texts_from_records(records: list[dict]) -> list[str]:
    texts = []
    for row in records:
        texts.extend(row["context_texts"])
        texts.append(row["decision_text"])
        texts.append(row["gold_rewrite"])
    return texts


@rewriter.command("run")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--transcript", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--labels", "labels_path", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def rewriter_run(model_path, transcript, labels_path, out_path):
    """Rewrite every TD-labeled utterance of one transcript into an item."""
    model = load_rewriter(model_path)
    with transcript.open("rb") as handle:
        meeting = parse_transcript(handle, meeting_id=transcript.stem, title=transcript.stem)
    with labels_path.open("rb") as handle:
        labels = load_labels(handle, meeting, source="predicted")
    items = []
    for label in labels:
        if label.tag != TD:
            continue
        item = rewrite(meeting, label, model)
        items.append(item)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w") as handle:
        for item in items:
            handle.write(json.dumps(vars(item)) + "\n")
    echo_kv("decisions", len(items))
    echo_kv("degraded", sum(1 for item in items if item.degraded))
    echo_kv("out", out_path)


# -- metrics --------------------------------------------------------------


@cli.group()
def metrics():
    """Score rewrites and summarize review sheets."""


@metrics.command("score")
@click.option("--pred", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--ref", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--orig", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--report-dir", type=click.Path(path_type=Path), default=None)
def metrics_score(pred, ref, orig, report_dir):
    """Corpus metrics for parallel line files of predictions/references/originals."""
    predictions = read_lines(pred)
    references = read_lines(ref)
    originals = read_lines(orig)
    report = evaluate_rewrites(predictions, references, originals)
    echo_kv("samples", len(report.samples))
    echo_kv("rouge1", f"{report.rouge1:.4f}")
    echo_kv("rouge2", f"{report.rouge2:.4f}")
    echo_kv("bleu", f"{report.bleu:.4f}")
    echo_kv("restoration_f1", f"{report.f1:.4f}")
    echo_kv("restoration_f2", f"{report.f2:.4f}")
    if report_dir is not None:
        from .report import render_eval_report

        paths = render_eval_report(report, report_dir)
        echo_kv("report_csv", paths.csv_path)
        echo_kv("report_figure", paths.figure_path)


@metrics.command("human")
@click.option("--sheet", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--criterion", required=True)
@click.option("--report-dir", type=click.Path(path_type=Path), default=None)
def metrics_human(sheet, criterion, report_dir):
    """Aggregate a JSONL review sheet of {sample_id, evaluator_id, score}."""
    score_sheet = ScoreSheet(criterion=criterion)
    with sheet.open() as handle:
        for raw in handle:
            if not raw.strip():
                continue
            record = json.loads(raw)
            score_sheet.add(record["sample_id"], record["evaluator_id"], record["score"])
    aggregate = aggregate_scores(score_sheet)
    echo_kv("criterion", aggregate.criterion)
    echo_kv("count", aggregate.count)
    echo_kv("mean", f"{aggregate.mean:.4f}")
    echo_kv("share_low", f"{aggregate.share_low:.4f}")
    echo_kv("share_high", f"{aggregate.share_high:.4f}")
    if report_dir is not None:
        from .report import render_score_histogram

        paths = render_score_histogram(aggregate, report_dir)
        echo_kv("report_csv", paths.csv_path)
        echo_kv("report_figure", paths.figure_path)


# -- server ---------------------------------------------------------------


def build_server_app(
    db_path: Path,
    detector_path: Path | None,
    rewriter_path: Path | None,
    auth_token: str | None,
    frontend_dir: Path | None,
    heuristic: bool,
    inline_jobs: bool = False,
):
    from .service import Storage, create_app, heuristic_models, load_pipeline_models

    if heuristic:
        models = heuristic_models()
    else:
        if detector_path is None or rewriter_path is None:
            raise ContractError("serve needs --detector and --rewriter checkpoints, or --heuristic")
        models = load_pipeline_models(detector_path, rewriter_path)
    storage = Storage(db_path)
    return create_app(
        storage,
        models,
        auth_token=auth_token,
        frontend_dir=frontend_dir,
        inline_jobs=inline_jobs,
    )


@cli.command("serve")
@click.option("--db", "db_path", type=click.Path(path_type=Path), required=True)
@click.option("--detector", "detector_path", type=click.Path(path_type=Path, exists=True), default=None)
@click.option("--rewriter", "rewriter_path", type=click.Path(path_type=Path, exists=True), default=None)
@click.option("--heuristic", is_flag=True, help="Serve with rule-based models instead of checkpoints.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--token", default=None, help="Require this bearer token on API calls.")
@click.option("--frontend-dir", type=click.Path(path_type=Path), default=None)
def serve(db_path, detector_path, rewriter_path, heuristic, host, port, token, frontend_dir):
    """Run the review API (and static frontend, when built) with uvicorn."""
    import uvicorn

    app = build_server_app(db_path, detector_path, rewriter_path, token, frontend_dir, heuristic)
    uvicorn.run(app, host=host, port=port)


def main():
    try:
        cli(standalone_mode=True)
    except DectrackError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
