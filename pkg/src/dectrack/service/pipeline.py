"""Processing pipeline: run the detector over a stored meeting, rewrite each
decision utterance, and commit the results as one atomic run.

Models reach the pipeline as plain callables so tests can use stubs and the
server can load trained checkpoints; a model must never be mutated by a run.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..corpus import NON_TD, TD, DecisionItem, DecisionLabel, Meeting
from ..errors import ConflictError
from .storage import ProcessingJob, Storage, now_iso


@dataclass
class PipelineModels:
    """Inference entry points plus version strings stamped onto items."""

    detect: Callable[[Meeting], Sequence[DecisionLabel]]
    rewrite_item: Callable[[Meeting, DecisionLabel], DecisionItem]
    detector_version: str = "unversioned"
    rewriter_version: str = "unversioned"


def load_pipeline_models(detector_path, rewriter_path) -> PipelineModels:
    """Build pipeline entry points from saved checkpoints."""
    from ..detector import load_detector, predict_tags
    from ..rewriter import load_rewriter, rewrite

    detector = load_detector(detector_path)
    rewriter = load_rewriter(rewriter_path)
    detector_version = f"{detector.config.mode}:{detector.backend.tokenizer.fingerprint()}"
    rewriter_version = f"{rewriter.mode}:{rewriter.backend.tokenizer.fingerprint()}"
    return PipelineModels(
        detect=lambda meeting: predict_tags(meeting, detector),
        rewrite_item=lambda meeting, label: rewrite(
            meeting, label, rewriter, rewriter_version=rewriter_version
        ),
        detector_version=detector_version,
        rewriter_version=rewriter_version,
    )


DECISION_CUES = ("we will ", "let us ", "we agreed", "going with", "we decided")
LEADING_FILLERS = ("uh", "um", "well", "okay", "so")


def heuristic_models() -> PipelineModels:
    """Rule-based bundle for demos and smoke runs: cue phrases mark decision
    utterances, rewriting only strips leading fillers."""

    def detect(meeting: Meeting) -> list[DecisionLabel]:
        labels = []
        for utterance in meeting.utterances:
            text = utterance.text.lower()
            tag = TD if any(cue in text for cue in DECISION_CUES) else NON_TD
            labels.append(DecisionLabel(utterance_id=utterance.id, tag=tag, source="predicted"))
        return labels

    def rewrite_item(meeting: Meeting, label: DecisionLabel) -> DecisionItem:
        utterance = meeting.utterance_by_id(label.utterance_id)
        words = utterance.text.split()
        while words and words[0].lower().strip(",.") in LEADING_FILLERS:
            words = words[1:]
        text = " ".join(words) or utterance.text
        return DecisionItem(
            id=uuid.uuid4().hex,
            meeting_id=meeting.id,
            utterance_id=utterance.id,
            original_text=utterance.text,
            rewritten_text=text,
            degraded=False,
            created_at=now_iso(),
            context_token_count=0,
            detector_version="heuristic-cues",
            rewriter_version="heuristic-filler-strip",
        )

    return PipelineModels(
        detect=detect,
        rewrite_item=rewrite_item,
        detector_version="heuristic-cues",
        rewriter_version="heuristic-filler-strip",
    )


def _fallback_item(meeting: Meeting, label: DecisionLabel, models: PipelineModels) -> DecisionItem:
    """Per-item rewriter failure keeps the original text and marks the item."""
    utterance = meeting.utterance_by_id(label.utterance_id)
    return DecisionItem(
        id=uuid.uuid4().hex,
        meeting_id=meeting.id,
        utterance_id=utterance.id,
        original_text=utterance.text,
        rewritten_text=utterance.text,
        degraded=True,
        created_at=now_iso(),
        context_token_count=0,
        detector_version=models.detector_version,
        rewriter_version=models.rewriter_version,
    )


def run_processing(storage: Storage, models: PipelineModels, meeting_id: str, run_id: str) -> None:
    """Execute one queued job to completion, committing or failing atomically.

    Rewriter failures on single items degrade those items only; everything
    else fails the job and leaves the previous run visible.
    """
    try:
        storage.transition_job(meeting_id, "detecting")
        meeting = storage.get_meeting(meeting_id)
        t0 = time.monotonic()
        labels = list(models.detect(meeting))
        positions = []
        for label in labels:
            utterance = meeting.utterance_by_id(label.utterance_id)
            if label.tag == TD:
                positions.append((utterance.index, label))
        detect_seconds = time.monotonic() - t0

        storage.transition_job(meeting_id, "rewriting", timings={"detect_seconds": round(detect_seconds, 6)})
        t0 = time.monotonic()
        items: list[tuple[DecisionItem, int]] = []
        for index, label in sorted(positions, key=lambda pair: pair[0]):
            try:
                item = models.rewrite_item(meeting, label)
                if not item.detector_version:
                    item.detector_version = models.detector_version
                if not item.rewriter_version:
                    item.rewriter_version = models.rewriter_version
            except Exception:
                item = _fallback_item(meeting, label, models)
            items.append((item, index))
        rewrite_seconds = time.monotonic() - t0

        storage.stage_run(meeting_id, run_id, labels, items)
        storage.commit_run(meeting_id, run_id)
        storage.transition_job(
            meeting_id, "done", timings={"rewrite_seconds": round(rewrite_seconds, 6)}
        )
    except Exception as exc:
        storage.abort_run(meeting_id, run_id)
        job = storage.get_job(meeting_id)
        if job is not None and job.state not in ("done", "failed"):
            storage.transition_job(meeting_id, "failed", error=f"{type(exc).__name__}: {exc}")


class JobRunner:
    """Per-meeting mutual exclusion around run_processing.

    inline=True executes the job before submit() returns, which tests and
    the CLI use; otherwise a daemon thread runs it and callers poll the job.
    """

    def __init__(self, storage: Storage, models: PipelineModels, inline: bool = False):
        self.storage = storage
        self.models = models
        self.inline = inline
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._threads: list[threading.Thread] = []

    def _lock_for(self, meeting_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(meeting_id, threading.Lock())

    def submit(self, meeting_id: str) -> ProcessingJob:
        lock = self._lock_for(meeting_id)
        if not lock.acquire(blocking=False):
            raise ConflictError(f"meeting {meeting_id!r} is already being processed")
        try:
            run_id = uuid.uuid4().hex
            job = self.storage.new_job(meeting_id, run_id)
        except BaseException:
            lock.release()
            raise
        if self.inline:
            try:
                run_processing(self.storage, self.models, meeting_id, run_id)
            finally:
                lock.release()
            return self.storage.get_job(meeting_id)

        def worker():
            try:
                run_processing(self.storage, self.models, meeting_id, run_id)
            finally:
                lock.release()

        thread = threading.Thread(target=worker, name=f"process-{meeting_id}", daemon=True)
        with self._registry_lock:
            self._threads = [t for t in self._threads if t.is_alive()]
            self._threads.append(thread)
        thread.start()
        return job

    def join(self, timeout: float | None = None) -> None:
        with self._registry_lock:
            threads = list(self._threads)
        for thread in threads:
            thread.join(timeout)
