"""Training loop with simulated user interaction, plus single-image inference.

Each training batch replays the interactive protocol: a hint count is
drawn from the interaction policy, that many keypoints get groundtruth
"clicks" encoded as hint heatmaps, and the model's own zero-hint output
serves as the previous-prediction input for the hinted samples.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import torch

from ..codec import (
    DecodeResult,
    GaussianParams,
    HeatmapStack,
    ImageGrid,
    KeypointSet,
    decode_local_soft_argmax,
    encode_heatmaps,
    encode_interaction,
)
from ..errors import ShapeError, WorkbenchError
from ..interaction import (
    CorrectionEvent,
    InteractionPolicy,
    build_model_input,
    pin_corrections,
    sample_hint_count,
    select_keypoints,
)
from ..morphology import LossWeights, MorphologySubsets
from .losses import TrainingLossTerms, training_loss
from .network import InteractiveKeypointNet

DIVERGENCE_LIMIT = 1.0e6


class TrainingDiverged(WorkbenchError):
    """Loss exceeded the divergence limit or became non-finite."""

    def __init__(self, message: str, seed: int, step: int):
        super().__init__(message)
        self.seed = seed
        self.step = step


@dataclass
class TrainingSample:
    """One annotated image: (C, H, W) float pixels and (K, 2) xy points."""

    image: np.ndarray
    points: np.ndarray

    def __post_init__(self) -> None:
        self.image = np.asarray(self.image, dtype=np.float32)
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.image.ndim != 3:
            raise ShapeError(f"sample image must be (C, H, W), got {self.image.shape}")
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ShapeError(f"sample points must be (K, 2), got {self.points.shape}")


@dataclass
class Batch:
    """Tensors for one optimization step."""

    images: torch.Tensor
    gt_maps: torch.Tensor
    gt_points: torch.Tensor
    prev: torch.Tensor
    hints: torch.Tensor
    hint_counts: tuple[int, ...]

    def __len__(self) -> int:
        return self.images.shape[0]


@dataclass
class LossRecord:
    """Detached per-step loss values for history/reporting."""

    step: int
    total: float
    heatmap: float
    distance: float | None = None
    angle: float | None = None
    skipped_triples: int = 0
    hint_counts: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "total": self.total,
            "heatmap": self.heatmap,
            "distance": self.distance,
            "angle": self.angle,
            "skipped_triples": self.skipped_triples,
            "hint_counts": list(self.hint_counts),
        }


class BatchBuilder:
    """Assembles training batches with policy-sampled hints."""

    def __init__(
        self,
        params: GaussianParams,
        policy: InteractionPolicy,
        rng: np.random.Generator,
    ):
        self.params = params
        self.policy = policy
        self.rng = rng

    def _simulate(self, points: np.ndarray) -> list[CorrectionEvent]:
        count = sample_hint_count(self.policy, self.rng)
        if count == 0:
            return []
        indices = select_keypoints(points.shape[0], count, self.rng)
        return [CorrectionEvent(int(i), (float(points[i, 0]), float(points[i, 1]))) for i in indices]

    def build(
        self,
        model: InteractiveKeypointNet,
        samples: list[TrainingSample],
        simulate_hints: bool = True,
    ) -> Batch:
        if not samples:
            raise ShapeError("cannot build an empty batch")
        num_kp = samples[0].points.shape[0]
        height, width = samples[0].image.shape[1:]
        size = (width, height)

        images = torch.from_numpy(np.stack([s.image for s in samples]))
        gt_points = torch.from_numpy(
            np.stack([s.points for s in samples]).astype(np.float32)
        )
        gt_maps = torch.from_numpy(
            np.stack(
                [
                    encode_heatmaps(KeypointSet(s.points), self.params, size).maps
                    for s in samples
                ]
            ).astype(np.float32)
        )

        corrections = [self._simulate(s.points) if simulate_hints else [] for s in samples]
        hint_counts = tuple(len(c) for c in corrections)
        hints = torch.from_numpy(
            np.stack(
                [
                    encode_interaction(
                        [(c.keypoint_index, c.coordinate) for c in evs],
                        self.params,
                        size,
                        num_kp,
                    ).maps
                    for evs in corrections
                ]
            ).astype(np.float32)
        )

        prev = torch.zeros_like(gt_maps)
        hinted = [i for i, n in enumerate(hint_counts) if n > 0]
        if hinted:
            with torch.no_grad():
                logits = model(images, torch.zeros_like(gt_maps), torch.zeros_like(hints))
                initial = torch.sigmoid(logits)
            for i in hinted:
                prev[i] = initial[i]

        return Batch(images, gt_maps, gt_points, prev, hints, hint_counts)


class Trainer:
    """AdamW training driver with divergence checks and per-step records."""

    def __init__(
        self,
        model: InteractiveKeypointNet,
        subsets: MorphologySubsets,
        weights: LossWeights,
        params: GaussianParams,
        policy: InteractionPolicy | None = None,
        learning_rate: float = 1e-3,
        seed: int = 0,
    ):
        self.model = model
        self.subsets = subsets
        self.weights = weights
        self.params = params
        self.policy = policy or InteractionPolicy.default(model.config.num_keypoints)
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.optimizer = torch.optim.AdamW(model.parameters(), lr=learning_rate)
        self.builder = BatchBuilder(params, self.policy, self.rng)
        self.step_index = 0
        self.history: list[LossRecord] = []

    def compute_loss(self, batch: Batch) -> TrainingLossTerms:
        logits = self.model(batch.images, batch.prev, batch.hints)
        return training_loss(
            logits,
            batch.gt_maps,
            batch.gt_points,
            self.subsets,
            self.weights,
            patch_radius=self.params.patch_radius,
            temperature=self.params.temperature,
        )

    def train_step(self, batch: Batch) -> LossRecord:
        self.optimizer.zero_grad()
        terms = self.compute_loss(batch)
        total = float(terms.total.detach())
        if not np.isfinite(total) or total > DIVERGENCE_LIMIT:
            raise TrainingDiverged(
                f"loss {total!r} at step {self.step_index} (seed {self.seed})"
                " exceeded the divergence limit",
                seed=self.seed,
                step=self.step_index,
            )
        terms.total.backward()
        self.optimizer.step()
        record = LossRecord(
            step=self.step_index,
            total=total,
            heatmap=float(terms.heatmap.detach()),
            distance=None if terms.distance is None else float(terms.distance.detach()),
            angle=None if terms.angle is None else float(terms.angle.detach()),
            skipped_triples=terms.skipped_triples,
            hint_counts=batch.hint_counts,
        )
        self.step_index += 1
        self.history.append(record)
        return record

    def fit(
        self,
        samples: list[TrainingSample],
        steps: int,
        batch_size: int = 4,
        simulate_hints: bool = True,
        log_every: int = 0,
        time_limit: float | None = None,
    ) -> list[LossRecord]:
        """Run ``steps`` optimization steps over randomly drawn batches."""
        if not samples:
            raise ShapeError("cannot train on an empty sample list")
        started = time.monotonic()
        records = []
        size = min(batch_size, len(samples))
        for _ in range(steps):
            idx = self.rng.choice(len(samples), size=size, replace=False)
            batch = self.builder.build(
                self.model, [samples[i] for i in idx], simulate_hints=simulate_hints
            )
            record = self.train_step(batch)
            records.append(record)
            if log_every and record.step % log_every == 0:
                print(
                    f"step {record.step}: loss={record.total:.4f}"
                    f" heatmap={record.heatmap:.4f}",
                    flush=True,
                )
            if time_limit is not None and time.monotonic() - started > time_limit:
                break
        return records


@dataclass
class PredictionResult:
    """Inference output: probability heatmaps and decoded (pinned) keypoints."""

    heatmaps: HeatmapStack
    keypoints: KeypointSet
    confidence: np.ndarray = field(default_factory=lambda: np.zeros(0))
    low_confidence: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))


def predict(
    model: InteractiveKeypointNet,
    image: ImageGrid,
    corrections: list[CorrectionEvent] | tuple = (),
    prev_pred: HeatmapStack | None = None,
    params: GaussianParams | None = None,
    include_unmodified_prev: bool = True,
    pin: bool = True,
) -> PredictionResult:
    """Run one refinement round and decode sub-pixel keypoints.

    Corrected keypoints are pinned to their exact submitted coordinates
    after decoding.  Raises if the network emits non-finite values.
    """
    params = params or GaussianParams()
    # The accumulated log may correct one keypoint several times; the
    # latest coordinate supersedes the rest (one hint per channel).
    by_index: dict[int, CorrectionEvent] = {c.keypoint_index: c for c in corrections}
    corrections = list(by_index.values())
    model_input = build_model_input(
        image,
        prev_pred,
        corrections,
        params,
        model.config.num_keypoints,
        mode="infer",
        include_unmodified_prev=include_unmodified_prev,
    )
    # Inference must not depend on whether the model object came from
    # build_model (train mode) or load_checkpoint (eval mode): attention
    # kernels dispatch differently per mode and drift in the last float bits.
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            logits = model(
                torch.from_numpy(model_input.image.pixels[None]),
                torch.from_numpy(model_input.prev_pred.maps.astype(np.float32)[None]),
                torch.from_numpy(model_input.user_hints.maps.astype(np.float32)[None]),
            )
    finally:
        model.train(was_training)
    probs = torch.sigmoid(logits)[0]
    maps = probs.cpu().numpy().astype(np.float64)
    if not np.all(np.isfinite(maps)):
        bad = int(np.count_nonzero(~np.isfinite(maps)))
        raise WorkbenchError(f"model produced {bad} non-finite heatmap values")
    stack = HeatmapStack(maps, sigma=params.sigma_heatmap)
    decoded: DecodeResult = decode_local_soft_argmax(stack, params)
    keypoints = decoded.keypoints
    if pin and corrections:
        keypoints = pin_corrections(keypoints, corrections)
    return PredictionResult(
        heatmaps=stack,
        keypoints=keypoints,
        confidence=decoded.confidence,
        low_confidence=decoded.low_confidence,
    )
