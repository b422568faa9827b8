"""SQLite persistence for meetings, labels, decision items, and processing jobs.

Processing runs are staged under a run id and become visible only when the
meeting's active_run_id flips inside a single transaction, so readers see
either the previous complete run or the new one, never a mix.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..corpus import DecisionItem, DecisionLabel, Meeting, Utterance
from ..errors import ConflictError, NotFoundError, SetupError, StateError

SCHEMA_VERSION = 1

SCHEMA = """
CREATE TABLE IF NOT EXISTS meta (
    key TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS meetings (
    id TEXT PRIMARY KEY,
    title TEXT NOT NULL,
    recorded_at TEXT,
    status TEXT NOT NULL,
    created_at TEXT NOT NULL,
    idempotency_key TEXT UNIQUE,
    active_run_id TEXT
);
CREATE TABLE IF NOT EXISTS utterances (
    meeting_id TEXT NOT NULL REFERENCES meetings(id),
    id TEXT NOT NULL,
    idx INTEGER NOT NULL,
    speaker TEXT NOT NULL,
    text TEXT NOT NULL,
    start_time REAL,
    end_time REAL,
    PRIMARY KEY (meeting_id, id)
);
CREATE TABLE IF NOT EXISTS labels (
    meeting_id TEXT NOT NULL,
    run_id TEXT NOT NULL,
    utterance_id TEXT NOT NULL,
    tag TEXT NOT NULL,
    source TEXT NOT NULL,
    PRIMARY KEY (meeting_id, run_id, utterance_id)
);
CREATE TABLE IF NOT EXISTS decision_items (
    id TEXT PRIMARY KEY,
    meeting_id TEXT NOT NULL,
    run_id TEXT NOT NULL,
    utterance_id TEXT NOT NULL,
    utterance_index INTEGER NOT NULL,
    original_text TEXT NOT NULL,
    rewritten_text TEXT NOT NULL,
    degraded INTEGER NOT NULL,
    created_at TEXT NOT NULL,
    context_token_count INTEGER NOT NULL,
    detector_version TEXT NOT NULL,
    rewriter_version TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS jobs (
    meeting_id TEXT PRIMARY KEY,
    run_id TEXT NOT NULL,
    state TEXT NOT NULL,
    error TEXT,
    timings TEXT NOT NULL,
    created_at TEXT NOT NULL,
    updated_at TEXT NOT NULL
);
"""

JOB_STATES = ("queued", "detecting", "rewriting", "done", "failed")
ALLOWED_TRANSITIONS = {
    "queued": {"detecting", "failed"},
    "detecting": {"rewriting", "failed"},
    "rewriting": {"done", "failed"},
    "done": set(),
    "failed": set(),
}
ACTIVE_STATES = {"queued", "detecting", "rewriting"}


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class ProcessingJob:
    meeting_id: str
    run_id: str
    state: str = "queued"
    error: str | None = None
    timings: dict[str, float] = field(default_factory=dict)
    created_at: str = ""
    updated_at: str = ""

    def to_dict(self) -> dict:
        return {
            "meeting_id": self.meeting_id,
            "run_id": self.run_id,
            "state": self.state,
            "error": self.error,
            "timings": self.timings,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


class Storage:
    """One store per database file; safe to share across request threads."""

    def __init__(self, path: str | Path):
        self.path = str(path)
        self._write_lock = threading.RLock()
        with self._connect() as conn:
            conn.executescript(SCHEMA)
            row = conn.execute("SELECT value FROM meta WHERE key = 'schema_version'").fetchone()
            if row is None:
                conn.execute(
                    "INSERT INTO meta (key, value) VALUES ('schema_version', ?)",
                    (str(SCHEMA_VERSION),),
                )
            elif int(row[0]) != SCHEMA_VERSION:
                raise SetupError(
                    f"database {self.path} has schema version {row[0]}, expected {SCHEMA_VERSION}"
                )

    @contextmanager
    def _connect(self):
        conn = sqlite3.connect(self.path, timeout=30.0)
        conn.row_factory = sqlite3.Row
        try:
            with conn:
                yield conn
        finally:
            conn.close()

    # -- meetings ---------------------------------------------------------

    def save_meeting(self, meeting: Meeting, idempotency_key: str | None = None) -> tuple[str, bool]:
        """Persist a meeting; a repeated idempotency key returns the prior id
        without writing anything. Returns (meeting_id, created)."""
        with self._write_lock, self._connect() as conn:
            if idempotency_key is not None:
                row = conn.execute(
                    "SELECT id FROM meetings WHERE idempotency_key = ?", (idempotency_key,)
                ).fetchone()
                if row is not None:
                    return row["id"], False
            conn.execute(
                "INSERT INTO meetings (id, title, recorded_at, status, created_at, idempotency_key)"
                " VALUES (?, ?, ?, ?, ?, ?)",
                (meeting.id, meeting.title, meeting.recorded_at, meeting.status, now_iso(), idempotency_key),
            )
            conn.executemany(
                "INSERT INTO utterances (meeting_id, id, idx, speaker, text, start_time, end_time)"
                " VALUES (?, ?, ?, ?, ?, ?, ?)",
                [
                    (meeting.id, u.id, u.index, u.speaker, u.text, u.start_time, u.end_time)
                    for u in meeting.utterances
                ],
            )
        return meeting.id, True

    def get_meeting(self, meeting_id: str) -> Meeting:
        with self._connect() as conn:
            row = conn.execute("SELECT * FROM meetings WHERE id = ?", (meeting_id,)).fetchone()
            if row is None:
                raise NotFoundError(f"meeting {meeting_id!r} not found")
            utterances = [
                Utterance(
                    id=u["id"],
                    index=u["idx"],
                    speaker=u["speaker"],
                    text=u["text"],
                    start_time=u["start_time"],
                    end_time=u["end_time"],
                )
                for u in conn.execute(
                    "SELECT * FROM utterances WHERE meeting_id = ? ORDER BY idx", (meeting_id,)
                )
            ]
        return Meeting(
            id=row["id"],
            title=row["title"],
            utterances=utterances,
            recorded_at=row["recorded_at"],
            status=row["status"],
        )

    def meeting_exists(self, meeting_id: str) -> bool:
        with self._connect() as conn:
            return (
                conn.execute("SELECT 1 FROM meetings WHERE id = ?", (meeting_id,)).fetchone()
                is not None
            )

    def list_meetings(self) -> list[dict]:
        with self._connect() as conn:
            rows = conn.execute(
                """
                SELECT m.id, m.title, m.recorded_at, m.status, m.created_at,
                       (SELECT COUNT(*) FROM utterances u WHERE u.meeting_id = m.id) AS utterance_count,
                       (SELECT COUNT(*) FROM decision_items d
                         WHERE d.meeting_id = m.id AND d.run_id = m.active_run_id) AS decision_count
                FROM meetings m ORDER BY m.created_at, m.id
                """
            ).fetchall()
        return [dict(row) for row in rows]

    def set_meeting_status(self, meeting_id: str, status: str) -> None:
        with self._write_lock, self._connect() as conn:
            updated = conn.execute(
                "UPDATE meetings SET status = ? WHERE id = ?", (status, meeting_id)
            ).rowcount
        if updated == 0:
            raise NotFoundError(f"meeting {meeting_id!r} not found")

    # -- jobs -------------------------------------------------------------

    def new_job(self, meeting_id: str, run_id: str) -> ProcessingJob:
        """Open a queued job, replacing any terminal one. A job still in
        flight raises ConflictError."""
        if not self.meeting_exists(meeting_id):
            raise NotFoundError(f"meeting {meeting_id!r} not found")
        stamp = now_iso()
        with self._write_lock, self._connect() as conn:
            row = conn.execute("SELECT state FROM jobs WHERE meeting_id = ?", (meeting_id,)).fetchone()
            if row is not None and row["state"] in ACTIVE_STATES:
                raise ConflictError(f"meeting {meeting_id!r} already has a job in state {row['state']!r}")
            conn.execute(
                "INSERT OR REPLACE INTO jobs (meeting_id, run_id, state, error, timings, created_at, updated_at)"
                " VALUES (?, ?, 'queued', NULL, '{}', ?, ?)",
                (meeting_id, run_id, stamp, stamp),
            )
        return ProcessingJob(meeting_id=meeting_id, run_id=run_id, created_at=stamp, updated_at=stamp)

    def get_job(self, meeting_id: str) -> ProcessingJob | None:
        with self._connect() as conn:
            row = conn.execute("SELECT * FROM jobs WHERE meeting_id = ?", (meeting_id,)).fetchone()
        if row is None:
            return None
        return ProcessingJob(
            meeting_id=row["meeting_id"],
            run_id=row["run_id"],
            state=row["state"],
            error=row["error"],
            timings=json.loads(row["timings"]),
            created_at=row["created_at"],
            updated_at=row["updated_at"],
        )

    def transition_job(
        self,
        meeting_id: str,
        new_state: str,
        error: str | None = None,
        timings: dict[str, float] | None = None,
    ) -> ProcessingJob:
        if new_state not in JOB_STATES:
            raise StateError(f"unknown job state {new_state!r}")
        with self._write_lock, self._connect() as conn:
            row = conn.execute("SELECT * FROM jobs WHERE meeting_id = ?", (meeting_id,)).fetchone()
            if row is None:
                raise NotFoundError(f"no job for meeting {meeting_id!r}")
            current = row["state"]
            if new_state not in ALLOWED_TRANSITIONS[current]:
                raise StateError(f"illegal job transition {current!r} -> {new_state!r}")
            merged = json.loads(row["timings"])
            if timings:
                merged.update(timings)
            conn.execute(
                "UPDATE jobs SET state = ?, error = ?, timings = ?, updated_at = ? WHERE meeting_id = ?",
                (new_state, error, json.dumps(merged), now_iso(), meeting_id),
            )
        return self.get_job(meeting_id)

    # -- processing runs --------------------------------------------------

    def stage_run(
        self,
        meeting_id: str,
        run_id: str,
        labels: list[DecisionLabel],
        items: list[tuple[DecisionItem, int]],
    ) -> None:
        """Write a run's labels and (item, utterance_index) pairs without
        making them visible."""
        with self._write_lock, self._connect() as conn:
            conn.executemany(
                "INSERT INTO labels (meeting_id, run_id, utterance_id, tag, source) VALUES (?, ?, ?, ?, ?)",
                [(meeting_id, run_id, l.utterance_id, l.tag, l.source) for l in labels],
            )
            conn.executemany(
                "INSERT INTO decision_items (id, meeting_id, run_id, utterance_id, utterance_index,"
                " original_text, rewritten_text, degraded, created_at, context_token_count,"
                " detector_version, rewriter_version)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                [
                    (
                        item.id,
                        meeting_id,
                        run_id,
                        item.utterance_id,
                        index,
                        item.original_text,
                        item.rewritten_text,
                        int(item.degraded),
                        item.created_at,
                        item.context_token_count,
                        item.detector_version,
                        item.rewriter_version,
                    )
                    for item, index in items
                ],
            )

    def commit_run(self, meeting_id: str, run_id: str) -> None:
        """Atomically make a staged run the visible one and drop older runs."""
        with self._write_lock, self._connect() as conn:
            updated = conn.execute(
                "UPDATE meetings SET active_run_id = ?, status = 'processed' WHERE id = ?",
                (run_id, meeting_id),
            ).rowcount
            if updated == 0:
                raise NotFoundError(f"meeting {meeting_id!r} not found")
            conn.execute(
                "DELETE FROM decision_items WHERE meeting_id = ? AND run_id != ?", (meeting_id, run_id)
            )
            conn.execute("DELETE FROM labels WHERE meeting_id = ? AND run_id != ?", (meeting_id, run_id))

    def abort_run(self, meeting_id: str, run_id: str) -> None:
        """Drop a staged run that will never commit."""
        with self._write_lock, self._connect() as conn:
            conn.execute(
                "DELETE FROM decision_items WHERE meeting_id = ? AND run_id = ?", (meeting_id, run_id)
            )
            conn.execute("DELETE FROM labels WHERE meeting_id = ? AND run_id = ?", (meeting_id, run_id))

    def get_decisions(self, meeting_id: str) -> list[tuple[DecisionItem, int]]:
        """Visible decision items with their utterance indices, in meeting order."""
        if not self.meeting_exists(meeting_id):
            raise NotFoundError(f"meeting {meeting_id!r} not found")
        with self._connect() as conn:
            rows = conn.execute(
                """
                SELECT d.* FROM decision_items d
                JOIN meetings m ON m.id = d.meeting_id AND m.active_run_id = d.run_id
                WHERE d.meeting_id = ? ORDER BY d.utterance_index
                """,
                (meeting_id,),
            ).fetchall()
        out = []
        for row in rows:
            item = DecisionItem(
                id=row["id"],
                meeting_id=row["meeting_id"],
                utterance_id=row["utterance_id"],
                original_text=row["original_text"],
                rewritten_text=row["rewritten_text"],
                degraded=bool(row["degraded"]),
                created_at=row["created_at"],
                context_token_count=row["context_token_count"],
                detector_version=row["detector_version"],
                rewriter_version=row["rewriter_version"],
            )
            out.append((item, row["utterance_index"]))
        return out

    def get_labels(self, meeting_id: str) -> list[DecisionLabel]:
        """Visible (committed-run) labels for a meeting."""
        with self._connect() as conn:
            rows = conn.execute(
                """
                SELECT l.utterance_id, l.tag, l.source FROM labels l
                JOIN meetings m ON m.id = l.meeting_id AND m.active_run_id = l.run_id
                WHERE l.meeting_id = ?
                """,
                (meeting_id,),
            ).fetchall()
        return [
            DecisionLabel(utterance_id=row["utterance_id"], tag=row["tag"], source=row["source"])
            for row in rows
        ]
