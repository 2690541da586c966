"""Interactive evaluation: click-to-refine trajectories and the metrics
derived from them.

The protocol simulates a reviewer: predict, correct the worst keypoint
with its groundtruth, let the model revise (or not, for the manual
baseline), repeat.  Correction order never depends on the target
threshold, so one trajectory of ``max_clicks`` rounds per image yields
the click count (NoC) and failure rate (FR) for every threshold at once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .codec import GaussianParams, HeatmapStack, ImageGrid, KeypointSet, radial_errors
from .errors import ShapeError
from .interaction import CorrectionEvent, pin_corrections
from .model.training import PredictionResult, TrainingSample

# predictor(image, accumulated corrections, previous-round heatmaps) -> result
Predictor = Callable[[ImageGrid, list[CorrectionEvent], HeatmapStack | None], PredictionResult]

CORRECTION_POLICIES = ("worst-first", "random")
REVISION_MODES = ("model", "manual")


@dataclass
class EvalProtocol:
    """How many clicks to spend and what MRE counts as success."""

    max_clicks: int = 5
    target_mre: float = 2.0
    correction_policy: str = "worst-first"
    revision: str = "model"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_clicks < 0:
            raise ShapeError("max_clicks must be >= 0")
        if self.target_mre <= 0:
            raise ShapeError("target_mre must be positive")
        if self.correction_policy not in CORRECTION_POLICIES:
            raise ShapeError(f"correction_policy must be one of {CORRECTION_POLICIES}")
        if self.revision not in REVISION_MODES:
            raise ShapeError(f"revision must be one of {REVISION_MODES}")


def worst_keypoint(pred: KeypointSet | np.ndarray, gt: KeypointSet | np.ndarray) -> int:
    """Index of the largest radial error; ties resolve to the lowest index."""
    errors = radial_errors(pred, gt)
    return int(np.argmax(errors))


@dataclass
class ImageTrajectory:
    """Per-round MREs and the corrections spent on one image."""

    mre_per_round: list[float]
    corrected_keypoints: list[int]
    error: str | None = None

    def achieved_round(self, beta: float, alpha: int) -> int | None:
        """First round (click count) whose MRE is strictly below ``beta``."""
        limit = min(alpha, len(self.mre_per_round) - 1)
        for r in range(limit + 1):
            if self.mre_per_round[r] < beta:
                return r
        return None

    def noc(self, beta: float, alpha: int) -> int:
        achieved = self.achieved_round(beta, alpha)
        return alpha if achieved is None else achieved

    def failed(self, beta: float, alpha: int) -> bool:
        return self.achieved_round(beta, alpha) is None


@dataclass
class EvalReport:
    """Trajectories plus aggregates at the protocol's (α, β)."""

    protocol: EvalProtocol
    trajectories: list[ImageTrajectory] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.trajectories:
            raise ShapeError("evaluation needs at least one image")

    def mean_noc(self, beta: float | None = None, alpha: int | None = None) -> float:
        beta = self.protocol.target_mre if beta is None else beta
        alpha = self._alpha(alpha)
        return float(np.mean([t.noc(beta, alpha) for t in self.trajectories]))

    def failure_rate(self, beta: float | None = None, alpha: int | None = None) -> float:
        """Percentage of images not reaching ``beta`` within ``alpha`` clicks."""
        beta = self.protocol.target_mre if beta is None else beta
        alpha = self._alpha(alpha)
        failures = sum(t.failed(beta, alpha) for t in self.trajectories)
        return 100.0 * failures / len(self.trajectories)

    def _alpha(self, alpha: int | None) -> int:
        if alpha is None:
            return self.protocol.max_clicks
        if alpha > self.protocol.max_clicks:
            raise ShapeError(
                f"alpha {alpha} exceeds recorded rounds ({self.protocol.max_clicks})"
            )
        return alpha

    def mean_mre_per_round(self) -> list[float]:
        """Mean MRE over images after 0..α clicks (failed images excluded)."""
        rounds = self.protocol.max_clicks + 1
        means = []
        for r in range(rounds):
            values = [
                t.mre_per_round[r]
                for t in self.trajectories
                if t.error is None and r < len(t.mre_per_round)
            ]
            means.append(float(np.mean(values)) if values else math.inf)
        return means

    def zero_click_mres(self) -> np.ndarray:
        return np.array([t.mre_per_round[0] for t in self.trajectories])

    def to_dict(self) -> dict:
        return {
            "protocol": {
                "max_clicks": self.protocol.max_clicks,
                "target_mre": self.protocol.target_mre,
                "correction_policy": self.protocol.correction_policy,
                "revision": self.protocol.revision,
                "seed": self.protocol.seed,
            },
            "mean_noc": self.mean_noc(),
            "failure_rate": self.failure_rate(),
            "mean_mre_per_round": self.mean_mre_per_round(),
            "images": [
                {
                    "mre_per_round": t.mre_per_round,
                    "corrected_keypoints": t.corrected_keypoints,
                    "error": t.error,
                }
                for t in self.trajectories
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))


def _select_keypoint(
    policy: str,
    points: np.ndarray,
    gt: np.ndarray,
    corrected: list[int],
    rng: np.random.Generator,
) -> int:
    if policy == "worst-first":
        return worst_keypoint(points, gt)
    remaining = [i for i in range(len(gt)) if i not in corrected]
    pool = remaining if remaining else list(range(len(gt)))
    return int(rng.choice(pool))


def _mre(points: np.ndarray, gt: np.ndarray) -> float:
    return float(np.mean(np.linalg.norm(points - gt, axis=1)))


def evaluate_image(
    predictor: Predictor,
    sample: TrainingSample,
    protocol: EvalProtocol,
    image_index: int = 0,
) -> ImageTrajectory:
    """Run the full click budget on one image, recording MRE per round."""
    gt = sample.points
    rng = np.random.default_rng((protocol.seed, image_index))
    image = ImageGrid(sample.image)
    try:
        result = predictor(image, [], None)
    except Exception as exc:  # inference failure: record, count as failed
        return ImageTrajectory(
            mre_per_round=[math.inf] * (protocol.max_clicks + 1),
            corrected_keypoints=[],
            error=f"{type(exc).__name__}: {exc}",
        )

    mres = [_mre(result.keypoints.points, gt)]
    corrections: list[CorrectionEvent] = []
    corrected: list[int] = []
    round0_points = result.keypoints.points.copy()
    prev_maps = result.heatmaps
    points = result.keypoints.points

    for r in range(1, protocol.max_clicks + 1):
        idx = _select_keypoint(protocol.correction_policy, points, gt, corrected, rng)
        corrections.append(CorrectionEvent(idx, (float(gt[idx, 0]), float(gt[idx, 1])), round=r))
        corrected.append(idx)
        if protocol.revision == "manual":
            points = pin_corrections(KeypointSet(round0_points), corrections).points
        else:
            try:
                result = predictor(image, list(corrections), prev_maps)
            except Exception as exc:
                return ImageTrajectory(
                    mre_per_round=mres + [math.inf] * (protocol.max_clicks + 1 - len(mres)),
                    corrected_keypoints=corrected,
                    error=f"{type(exc).__name__}: {exc}",
                )
            prev_maps = result.heatmaps
            points = result.keypoints.points
        mres.append(_mre(points, gt))
    return ImageTrajectory(mre_per_round=mres, corrected_keypoints=corrected)


def run_interactive_eval(
    predictor: Predictor,
    samples: Sequence[TrainingSample],
    protocol: EvalProtocol,
) -> EvalReport:
    trajectories = [
        evaluate_image(predictor, sample, protocol, image_index=i)
        for i, sample in enumerate(samples)
    ]
    return EvalReport(protocol=protocol, trajectories=trajectories)


@dataclass
class RevisionComparison:
    """Per-image MREs after one correction, without/with a model re-run."""

    manual_mres: np.ndarray
    model_mres: np.ndarray

    @property
    def mean_manual(self) -> float:
        return float(np.mean(self.manual_mres))

    @property
    def mean_model(self) -> float:
        return float(np.mean(self.model_mres))

    @property
    def model_no_worse_fraction(self) -> float:
        """Fraction of images where the model revision is at least as good."""
        return float(np.mean(self.model_mres <= self.manual_mres))


def revision_comparison(
    predictor: Predictor, samples: Sequence[TrainingSample], protocol: EvalProtocol | None = None
) -> RevisionComparison:
    """Compare one-click manual pinning against one-click model revision.

    Both arms fix the same worst keypoint to its groundtruth; the model
    arm re-runs the network with that correction, the manual arm keeps
    the remaining keypoints untouched.
    """
    manual, revised = [], []
    for sample in samples:
        image = ImageGrid(sample.image)
        gt = sample.points
        initial = predictor(image, [], None)
        idx = worst_keypoint(initial.keypoints.points, gt)
        correction = CorrectionEvent(idx, (float(gt[idx, 0]), float(gt[idx, 1])))

        pinned = pin_corrections(initial.keypoints, [correction])
        manual.append(_mre(pinned.points, gt))

        result = predictor(image, [correction], initial.heatmaps)
        revised.append(_mre(result.keypoints.points, gt))
    return RevisionComparison(np.array(manual), np.array(revised))


def interaction_curves(report: EvalReport, beta_grid: Sequence[float]) -> dict:
    """Plot-ready tables derived from recorded trajectories."""
    return {
        "mre_vs_clicks": {
            "clicks": list(range(report.protocol.max_clicks + 1)),
            "mean_mre": report.mean_mre_per_round(),
        },
        "noc_vs_beta": {
            "beta": list(beta_grid),
            "mean_noc": [report.mean_noc(beta=b) for b in beta_grid],
        },
        "fr_vs_beta": {
            "beta": list(beta_grid),
            "failure_rate": [report.failure_rate(beta=b) for b in beta_grid],
        },
    }


def threshold_failure_rate(
    zero_click_mres: np.ndarray | Sequence[float], tau_grid: Sequence[float]
) -> dict[float, float]:
    """Percentage of images whose zero-click MRE strictly exceeds each τ."""
    mres = np.asarray(zero_click_mres, dtype=np.float64)
    if mres.ndim != 1 or len(mres) == 0:
        raise ShapeError("zero_click_mres must be a non-empty 1-D array")
    return {float(t): float(100.0 * np.mean(mres > t)) for t in tau_grid}


def model_predictor(model, params: GaussianParams | None = None) -> Predictor:
    """Adapt a trained network to the evaluation predictor interface."""
    from .model.training import predict

    params = params or GaussianParams()

    def _run(
        image: ImageGrid,
        corrections: list[CorrectionEvent],
        prev: HeatmapStack | None,
    ) -> PredictionResult:
        return predict(model, image, corrections, prev_pred=prev, params=params)

    return _run
