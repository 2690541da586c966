"""Append-only session persistence on sqlite plus content-addressed images.

Rounds are event-sourced: round 0 is the zero-hint prediction, every
later round records exactly one correction and the prediction it
triggered.  Rows are never updated or deleted (status changes excepted),
so replaying the log against the same weights reproduces the session.
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import SessionError

_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions (
    session_id TEXT PRIMARY KEY,
    created_at TEXT NOT NULL DEFAULT (datetime('now')),
    image_sha TEXT NOT NULL,
    image_path TEXT NOT NULL,
    width INTEGER NOT NULL,
    height INTEGER NOT NULL,
    keypoint_names TEXT NOT NULL,
    age REAL,
    sex TEXT,
    patient_id TEXT,
    status TEXT NOT NULL DEFAULT 'open'
);
CREATE TABLE IF NOT EXISTS rounds (
    session_id TEXT NOT NULL REFERENCES sessions(session_id),
    round_index INTEGER NOT NULL,
    correction TEXT,
    points TEXT NOT NULL,
    confidence TEXT NOT NULL,
    created_at TEXT NOT NULL DEFAULT (datetime('now')),
    PRIMARY KEY (session_id, round_index)
);
"""


@dataclass
class RoundRecord:
    round_index: int
    points: np.ndarray
    confidence: np.ndarray
    correction: dict | None = None  # {"keypoint_index": int, "x": float, "y": float}


@dataclass
class SessionRecord:
    session_id: str
    image_sha: str
    image_path: str
    width: int
    height: int
    keypoint_names: tuple[str, ...]
    age: float | None
    sex: str | None
    patient_id: str | None
    status: str
    rounds: list[RoundRecord] = field(default_factory=list)

    @property
    def corrections(self) -> list[dict]:
        return [r.correction for r in self.rounds if r.correction is not None]

    @property
    def latest_points(self) -> np.ndarray:
        return self.rounds[-1].points


class SessionStore:
    """Single-file sqlite store; safe for threaded FastAPI handlers."""

    def __init__(self, db_path: str | Path, images_dir: str | Path):
        self.db_path = Path(db_path)
        self.images_dir = Path(images_dir)
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self.images_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(self.db_path, check_same_thread=False)
        self._conn.executescript(_SCHEMA)
        self._conn.commit()

    def close(self) -> None:
        self._conn.close()

    # -- images ------------------------------------------------------

    def save_image(self, data: bytes, suffix: str = ".png") -> tuple[str, Path]:
        """Store bytes content-addressed; returns (sha256, path)."""
        sha = hashlib.sha256(data).hexdigest()
        path = self.images_dir / f"{sha}{suffix}"
        if not path.exists():
            path.write_bytes(data)
        return sha, path

    # -- sessions ----------------------------------------------------

    def create_session(
        self,
        image_sha: str,
        image_path: str,
        width: int,
        height: int,
        keypoint_names: tuple[str, ...],
        age: float | None = None,
        sex: str | None = None,
        patient_id: str | None = None,
    ) -> str:
        session_id = uuid.uuid4().hex
        with self._lock:
            self._conn.execute(
                "INSERT INTO sessions (session_id, image_sha, image_path, width, height,"
                " keypoint_names, age, sex, patient_id) VALUES (?,?,?,?,?,?,?,?,?)",
                (
                    session_id,
                    image_sha,
                    str(image_path),
                    width,
                    height,
                    json.dumps(list(keypoint_names)),
                    age,
                    sex,
                    patient_id,
                ),
            )
            self._conn.commit()
        return session_id

    def append_round(self, session_id: str, record: RoundRecord) -> None:
        points = json.dumps([[float(x), float(y)] for x, y in record.points])
        confidence = json.dumps([float(c) for c in record.confidence])
        correction = None if record.correction is None else json.dumps(record.correction)
        with self._lock:
            row = self._conn.execute(
                "SELECT status, COALESCE(MAX(round_index), -1) FROM sessions"
                " LEFT JOIN rounds USING (session_id) WHERE session_id = ?",
                (session_id,),
            ).fetchone()
            if row is None or row[0] is None:
                raise SessionError(f"unknown session: {session_id}")
            status, last_round = row
            if status != "open":
                raise SessionError(f"session {session_id} is {status}; corrections are closed")
            if record.round_index != last_round + 1:
                raise SessionError(
                    f"round {record.round_index} out of order; expected {last_round + 1}"
                )
            self._conn.execute(
                "INSERT INTO rounds (session_id, round_index, correction, points, confidence)"
                " VALUES (?,?,?,?,?)",
                (session_id, record.round_index, correction, points, confidence),
            )
            self._conn.commit()

    def set_status(self, session_id: str, status: str) -> None:
        with self._lock:
            cur = self._conn.execute(
                "UPDATE sessions SET status = ? WHERE session_id = ?", (status, session_id)
            )
            if cur.rowcount == 0:
                raise SessionError(f"unknown session: {session_id}")
            self._conn.commit()

    def get_session(self, session_id: str) -> SessionRecord:
        with self._lock:
            row = self._conn.execute(
                "SELECT session_id, image_sha, image_path, width, height, keypoint_names,"
                " age, sex, patient_id, status FROM sessions WHERE session_id = ?",
                (session_id,),
            ).fetchone()
            if row is None:
                raise SessionError(f"unknown session: {session_id}")
            round_rows = self._conn.execute(
                "SELECT round_index, correction, points, confidence FROM rounds"
                " WHERE session_id = ? ORDER BY round_index",
                (session_id,),
            ).fetchall()
        rounds = [
            RoundRecord(
                round_index=index,
                points=np.array(json.loads(points), dtype=np.float64),
                confidence=np.array(json.loads(confidence), dtype=np.float64),
                correction=None if correction is None else json.loads(correction),
            )
            for index, correction, points, confidence in round_rows
        ]
        return SessionRecord(
            session_id=row[0],
            image_sha=row[1],
            image_path=row[2],
            width=row[3],
            height=row[4],
            keypoint_names=tuple(json.loads(row[5])),
            age=row[6],
            sex=row[7],
            patient_id=row[8],
            status=row[9],
            rounds=rounds,
        )

    def list_sessions(self) -> list[str]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT session_id FROM sessions ORDER BY created_at"
            ).fetchall()
        return [r[0] for r in rows]
