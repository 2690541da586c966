"""Simulated user interaction.

Samples how many keypoints a user corrects (skewed toward few corrections),
which ones, assembles the three-part model input (image, previous
prediction, hint heatmaps), and pins corrected keypoints in decoded output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import GaussianParams, HeatmapStack, ImageGrid, KeypointSet, encode_interaction
from .errors import KeypointIndexError, PolicyError, ShapeError

__all__ = [
    "InteractionPolicy",
    "CorrectionEvent",
    "ModelInput",
    "sample_hint_count",
    "select_keypoints",
    "build_model_input",
    "pin_corrections",
]

ZERO_HINT_PROB = 1.0 / 8.0
SINGLE_HINT_PROB = 1.0 / 2.0


@dataclass
class InteractionPolicy:
    """Probability vector over hint counts {0, ..., K}."""

    hint_count_probs: np.ndarray

    def __post_init__(self) -> None:
        self.hint_count_probs = np.asarray(self.hint_count_probs, dtype=np.float64)
        p = self.hint_count_probs
        if p.ndim != 1 or len(p) < 1:
            raise PolicyError("hint_count_probs must be a non-empty 1-D vector")
        if np.any(~np.isfinite(p)) or np.any(p < 0):
            raise PolicyError("hint_count_probs must be finite and non-negative")
        if abs(float(p.sum()) - 1.0) > 1e-9:
            raise PolicyError(f"hint_count_probs must sum to 1, got {p.sum()!r}")

    @property
    def max_hints(self) -> int:
        return len(self.hint_count_probs) - 1

    @classmethod
    def default(cls, num_keypoints: int) -> "InteractionPolicy":
        """Zero hints with probability 1/8, one hint with 1/2, and the
        remaining 3/8 spread geometrically (ratio 1/2) over counts 2..K."""
        if num_keypoints < 1:
            raise PolicyError("need at least one keypoint")
        probs = np.zeros(num_keypoints + 1)
        probs[0] = ZERO_HINT_PROB
        probs[1] = 1.0 - ZERO_HINT_PROB if num_keypoints == 1 else SINGLE_HINT_PROB
        if num_keypoints >= 2:
            tail = 0.5 ** np.arange(num_keypoints - 1, dtype=np.float64)
            probs[2:] = (1.0 - ZERO_HINT_PROB - SINGLE_HINT_PROB) * tail / tail.sum()
        return cls(probs)


@dataclass
class CorrectionEvent:
    """One user correction: which keypoint, where, in which refinement round."""

    keypoint_index: int
    coordinate: tuple[float, float]
    round: int = 1

    def __post_init__(self) -> None:
        x, y = self.coordinate
        if not (np.isfinite(x) and np.isfinite(y)):
            raise ShapeError("correction coordinate must be finite")
        if self.keypoint_index < 0:
            raise KeypointIndexError(f"negative keypoint index {self.keypoint_index}")


@dataclass
class ModelInput:
    """The three-part network input; all parts share the same (W, H)."""

    image: ImageGrid
    prev_pred: HeatmapStack
    user_hints: HeatmapStack

    def __post_init__(self) -> None:
        if not (self.image.size == self.prev_pred.size == self.user_hints.size):
            raise ShapeError(
                "image, prev_pred and user_hints must share (W, H); got "
                f"{self.image.size}, {self.prev_pred.size}, {self.user_hints.size}"
            )
        if self.prev_pred.num_keypoints != self.user_hints.num_keypoints:
            raise ShapeError("prev_pred and user_hints must have the same channel count")


def _as_rng(seed: int | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_hint_count(policy: InteractionPolicy, rng_seed: int | np.random.Generator) -> int:
    """Draw a hint count in [0, K] from the policy; deterministic per seed."""
    rng = _as_rng(rng_seed)
    return int(rng.choice(len(policy.hint_count_probs), p=policy.hint_count_probs))


def select_keypoints(num_keypoints: int, count: int, rng_seed: int | np.random.Generator) -> np.ndarray:
    """Pick ``count`` distinct keypoint indices uniformly without replacement."""
    if count < 0 or count > num_keypoints:
        raise KeypointIndexError(f"cannot select {count} of {num_keypoints} keypoints")
    rng = _as_rng(rng_seed)
    return np.sort(rng.choice(num_keypoints, size=count, replace=False))


def build_model_input(
    image: ImageGrid,
    prev_pred: HeatmapStack | None,
    corrections: list[CorrectionEvent],
    params: GaussianParams,
    num_keypoints: int,
    mode: str = "infer",
    include_unmodified_prev: bool = True,
) -> ModelInput:
    """Assemble one network input for a refinement round.

    Round 0 (no previous prediction, no corrections) yields all-zero
    prev_pred and hint stacks.  In infer mode the previous prediction
    channels of corrected keypoints are always retained; the remaining
    channels are passed through when ``include_unmodified_prev`` is set and
    zeroed otherwise.  Train mode forwards ``prev_pred`` untouched, leaving
    channel selection to the training simulation.
    """
    if mode not in ("train", "infer"):
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
    size = image.size
    seen: set[int] = set()
    for c in corrections:
        if c.keypoint_index >= num_keypoints:
            raise KeypointIndexError(f"correction index {c.keypoint_index} out of range [0, {num_keypoints})")
        if c.keypoint_index in seen:
            raise KeypointIndexError(f"duplicate correction index {c.keypoint_index}")
        seen.add(c.keypoint_index)

    hints = encode_interaction(
        [(c.keypoint_index, c.coordinate) for c in corrections], params, size, num_keypoints
    )

    if prev_pred is None:
        prev = HeatmapStack.zeros(num_keypoints, size)
    elif mode == "train" or include_unmodified_prev:
        prev = HeatmapStack(prev_pred.maps.copy(), prev_pred.sigma)
    else:
        maps = np.zeros_like(prev_pred.maps)
        for idx in seen:
            maps[idx] = prev_pred.maps[idx]
        prev = HeatmapStack(maps, prev_pred.sigma)
    return ModelInput(image, prev, hints)


def pin_corrections(decoded: KeypointSet, corrections: list[CorrectionEvent]) -> KeypointSet:
    """Force user-corrected keypoints to their exact submitted coordinates."""
    pinned = decoded.copy()
    for c in corrections:
        if not 0 <= c.keypoint_index < len(pinned):
            raise KeypointIndexError(f"correction index {c.keypoint_index} out of range [0, {len(pinned)})")
        pinned.points[c.keypoint_index] = c.coordinate
    return pinned
