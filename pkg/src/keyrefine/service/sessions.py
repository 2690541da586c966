"""Session orchestration: inference rounds over the persisted event log.

The store keeps only corrections and decoded points; heatmaps are
recomputed on demand by replaying the deterministic inference chain, so
a process restart (or an auditor with the same weights) reproduces every
round exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..codec import GaussianParams, HeatmapStack, ImageGrid
from ..errors import KeypointIndexError, SessionError
from ..interaction import CorrectionEvent
from ..model.network import InteractiveKeypointNet
from ..model.training import PredictionResult, predict
from .store import RoundRecord, SessionRecord, SessionStore


def _events(corrections: list[dict]) -> list[CorrectionEvent]:
    return [
        CorrectionEvent(int(c["keypoint_index"]), (float(c["x"]), float(c["y"])), round=i + 1)
        for i, c in enumerate(corrections)
    ]


class SessionManager:
    """Runs model rounds for stored sessions and caches their heatmaps."""

    def __init__(
        self,
        store: SessionStore,
        model: InteractiveKeypointNet,
        params: GaussianParams,
        keypoint_names: tuple[str, ...],
    ):
        if len(keypoint_names) != model.config.num_keypoints:
            raise SessionError(
                f"model expects {model.config.num_keypoints} keypoints,"
                f" schema names {len(keypoint_names)}"
            )
        self.store = store
        self.model = model
        self.params = params
        self.keypoint_names = keypoint_names
        self._heatmap_cache: dict[str, tuple[int, HeatmapStack]] = {}

    # -- inference chain ----------------------------------------------

    def _load_image(self, record: SessionRecord) -> ImageGrid:
        from ..datasets import load_image

        return load_image(record.image_path, size=(record.width, record.height))

    def _run_round(
        self,
        image: ImageGrid,
        corrections: list[CorrectionEvent],
        prev: HeatmapStack | None,
    ) -> PredictionResult:
        return predict(
            self.model, image, corrections, prev_pred=prev, params=self.params
        )

    def _chain(
        self, record: SessionRecord, upto_round: int, image: ImageGrid | None = None
    ) -> PredictionResult:
        """Recompute predictions from the log up to ``upto_round`` inclusive."""
        image = image or self._load_image(record)
        events = _events(record.corrections)
        result = self._run_round(image, [], None)
        for r in range(1, upto_round + 1):
            result = self._run_round(image, events[:r], result.heatmaps)
        return result

    def _latest_heatmaps(self, record: SessionRecord, image: ImageGrid) -> HeatmapStack:
        last_round = record.rounds[-1].round_index
        cached = self._heatmap_cache.get(record.session_id)
        if cached is not None and cached[0] == last_round:
            return cached[1]
        result = self._chain(record, last_round, image)
        self._heatmap_cache[record.session_id] = (last_round, result.heatmaps)
        return result.heatmaps

    # -- public operations ---------------------------------------------

    def create_session(
        self,
        image_bytes: bytes,
        age: float | None = None,
        sex: str | None = None,
        patient_id: str | None = None,
        size: tuple[int, int] | None = None,
    ) -> SessionRecord:
        """Persist the image, run the zero-hint round, store round 0."""
        import io

        from PIL import Image, UnidentifiedImageError

        sha, path = self.store.save_image(image_bytes)
        try:
            with Image.open(io.BytesIO(image_bytes)) as img:
                img = img.convert("L")
                if size is not None and img.size != tuple(size):
                    img = img.resize(tuple(size), Image.BILINEAR)
                pixels = np.asarray(img, dtype=np.float32) / 255.0
        except UnidentifiedImageError as exc:
            raise SessionError(f"unreadable image: {exc}") from exc
        grid = ImageGrid(pixels[None])
        width, height = grid.size

        result = self._run_round(grid, [], None)
        session_id = self.store.create_session(
            image_sha=sha,
            image_path=str(path),
            width=width,
            height=height,
            keypoint_names=self.keypoint_names,
            age=age,
            sex=sex,
            patient_id=patient_id,
        )
        self.store.append_round(
            session_id,
            RoundRecord(
                round_index=0,
                points=result.keypoints.points,
                confidence=result.confidence,
                correction=None,
            ),
        )
        self._heatmap_cache[session_id] = (0, result.heatmaps)
        return self.store.get_session(session_id)

    def submit_correction(
        self, session_id: str, keypoint_index: int, x: float, y: float
    ) -> SessionRecord:
        record = self.store.get_session(session_id)
        if record.status != "open":
            raise SessionError(f"session {session_id} is {record.status}")
        if not 0 <= keypoint_index < len(self.keypoint_names):
            raise KeypointIndexError(
                f"keypoint index {keypoint_index} out of range"
                f" [0, {len(self.keypoint_names)})"
            )
        image = self._load_image(record)
        prev = self._latest_heatmaps(record, image)
        events = _events(record.corrections)
        events.append(CorrectionEvent(keypoint_index, (x, y), round=len(events) + 1))
        result = self._run_round(image, events, prev)
        next_round = record.rounds[-1].round_index + 1
        self.store.append_round(
            session_id,
            RoundRecord(
                round_index=next_round,
                points=result.keypoints.points,
                confidence=result.confidence,
                correction={"keypoint_index": keypoint_index, "x": x, "y": y},
            ),
        )
        self._heatmap_cache[session_id] = (next_round, result.heatmaps)
        return self.store.get_session(session_id)

    def finalize(self, session_id: str) -> SessionRecord:
        self.store.set_status(session_id, "finalized")
        return self.store.get_session(session_id)


@dataclass
class ReplayResult:
    """Outcome of recomputing a stored session from its correction log."""

    session_id: str
    rounds_checked: int
    identical: bool
    max_abs_difference: float


def replay_session(manager: SessionManager, session_id: str) -> ReplayResult:
    """Re-run every stored round and compare against the log, bit for bit."""
    record = manager.store.get_session(session_id)
    image = manager._load_image(record)
    events = _events(record.corrections)
    max_diff = 0.0
    identical = True
    result = manager._run_round(image, [], None)
    for stored in record.rounds:
        if stored.round_index > 0:
            result = manager._run_round(image, events[: stored.round_index], result.heatmaps)
        diff = np.abs(result.keypoints.points - stored.points)
        max_diff = max(max_diff, float(diff.max(initial=0.0)))
        if not np.array_equal(result.keypoints.points, stored.points):
            identical = False
    return ReplayResult(
        session_id=session_id,
        rounds_checked=len(record.rounds),
        identical=identical,
        max_abs_difference=max_diff,
    )
