"""Render training logs, rewrite evaluations, and review-score sheets to CSV
files plus matplotlib figures, so runs can be compared without re-opening a
Python session.

Every render_* function writes into a directory and returns the paths it
created; figures use the Agg backend and never open a window.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .detector.training import TrainingLog
from .errors import ContractError
from .metrics import EvalReport, ScoreAggregate
from .rewriter.training import RewriterTrainingLog


@dataclass
class ReportPaths:
    csv_path: Path
    figure_path: Path

    def as_list(self) -> list[Path]:
        return [self.csv_path, self.figure_path]


def _ensure_dir(out_dir: str | Path) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in fieldnames})


def render_detector_curves(log: TrainingLog, out_dir: str | Path, stem: str = "detector_training") -> ReportPaths:
    """Loss and validation P/R/F1 per epoch, with the restored epoch marked."""
    if not log.records:
        raise ContractError("training log has no records")
    out = _ensure_dir(out_dir)
    rows = log.rows()
    csv_path = out / f"{stem}.csv"
    _write_csv(csv_path, ["epoch", "train_loss", "val_precision", "val_recall", "val_f1"], rows)

    epochs = [r["epoch"] for r in rows]
    fig, (ax_loss, ax_val) = plt.subplots(1, 2, figsize=(10, 4))
    ax_loss.plot(epochs, [r["train_loss"] for r in rows], marker="o", color="tab:blue")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("train loss")
    ax_loss.set_title("training loss")
    for key, color in (("val_precision", "tab:green"), ("val_recall", "tab:orange"), ("val_f1", "tab:red")):
        ax_val.plot(epochs, [r[key] for r in rows], marker=".", label=key.removeprefix("val_"), color=color)
    ax_val.axvline(log.best_epoch, linestyle="--", color="gray", label=f"best epoch {log.best_epoch}")
    ax_val.set_xlabel("epoch")
    ax_val.set_ylim(-0.05, 1.05)
    ax_val.set_title("validation scores")
    ax_val.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    figure_path = out / f"{stem}.png"
    fig.savefig(figure_path, dpi=120)
    plt.close(fig)
    return ReportPaths(csv_path=csv_path, figure_path=figure_path)


def render_rewriter_curves(
    log: RewriterTrainingLog, out_dir: str | Path, stem: str = "rewriter_training"
) -> ReportPaths:
    """Joint/generation/picker losses per epoch and validation ROUGE-1 where scored."""
    if not log.records:
        raise ContractError("training log has no records")
    out = _ensure_dir(out_dir)
    rows = log.rows()
    csv_path = out / f"{stem}.csv"
    _write_csv(csv_path, ["epoch", "train_loss", "gen_loss", "picker_loss", "val_rouge1"], rows)

    epochs = [r["epoch"] for r in rows]
    fig, (ax_loss, ax_val) = plt.subplots(1, 2, figsize=(10, 4))
    ax_loss.plot(epochs, [r["train_loss"] for r in rows], marker="o", label="total", color="tab:blue")
    ax_loss.plot(epochs, [r["gen_loss"] for r in rows], marker=".", label="generation", color="tab:purple")
    if any(r["picker_loss"] is not None for r in rows):
        ax_loss.plot(
            epochs,
            [r["picker_loss"] for r in rows],
            marker=".",
            label="picker",
            color="tab:brown",
        )
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("loss")
    ax_loss.set_title("training losses")
    ax_loss.legend(fontsize=8)
    scored = [(r["epoch"], r["val_rouge1"]) for r in rows if r["val_rouge1"] is not None]
    if scored:
        ax_val.plot([e for e, _ in scored], [v for _, v in scored], marker="o", color="tab:red")
    ax_val.axvline(log.best_epoch, linestyle="--", color="gray", label=f"best epoch {log.best_epoch}")
    ax_val.set_xlabel("epoch")
    ax_val.set_ylabel("val ROUGE-1")
    ax_val.set_ylim(-0.05, 1.05)
    ax_val.set_title("validation ROUGE-1")
    ax_val.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    figure_path = out / f"{stem}.png"
    fig.savefig(figure_path, dpi=120)
    plt.close(fig)
    return ReportPaths(csv_path=csv_path, figure_path=figure_path)


def render_eval_report(report: EvalReport, out_dir: str | Path, stem: str = "rewrite_eval") -> ReportPaths:
    """Per-sample metric table plus a corpus-average bar chart."""
    out = _ensure_dir(out_dir)
    csv_path = out / f"{stem}.csv"
    sample_rows = [vars(s) for s in report.samples]
    _write_csv(csv_path, ["sample_id", "rouge1", "rouge2", "bleu", "f1", "f2"], sample_rows)

    names = ["rouge1", "rouge2", "bleu", "f1", "f2"]
    values = [report.rouge1, report.rouge2, report.bleu, report.f1, report.f2]
    fig, ax = plt.subplots(figsize=(6, 4))
    bars = ax.bar(names, values, color="tab:blue")
    for bar, value in zip(bars, values):
        ax.text(bar.get_x() + bar.get_width() / 2, value + 0.01, f"{value:.3f}", ha="center", fontsize=8)
    ax.set_ylim(0, 1.1)
    ax.set_ylabel("corpus average")
    ax.set_title(
        f"rewrite quality over {len(report.samples)} samples "
        f"(f1 on {report.f1_sample_count}, f2 on {report.f2_sample_count})"
    )
    fig.tight_layout()
    figure_path = out / f"{stem}.png"
    fig.savefig(figure_path, dpi=120)
    plt.close(fig)
    return ReportPaths(csv_path=csv_path, figure_path=figure_path)


def render_score_histogram(
    aggregate: ScoreAggregate, out_dir: str | Path, stem: str = "review_scores"
) -> ReportPaths:
    """Score-frequency histogram for one review criterion."""
    out = _ensure_dir(out_dir)
    csv_path = out / f"{stem}.csv"
    rows = [
        {"score": score, "count": count, "ratio": aggregate.ratios[score]}
        for score, count in sorted(aggregate.histogram.items())
    ]
    _write_csv(csv_path, ["score", "count", "ratio"], rows)

    fig, ax = plt.subplots(figsize=(6, 4))
    scores = sorted(aggregate.histogram)
    ax.bar([str(s) for s in scores], [aggregate.histogram[s] for s in scores], color="tab:green")
    ax.set_xlabel("score")
    ax.set_ylabel("count")
    ax.set_title(
        f"{aggregate.criterion}: mean {aggregate.mean:.3f} over {aggregate.count} entries "
        f"(<=2: {aggregate.share_low:.1%}, >=4: {aggregate.share_high:.1%})"
    )
    fig.tight_layout()
    figure_path = out / f"{stem}.png"
    fig.savefig(figure_path, dpi=120)
    plt.close(fig)
    return ReportPaths(csv_path=csv_path, figure_path=figure_path)
