"""Inter-keypoint morphology statistics and the morphology-aware loss.

Distances between keypoint pairs and angles between keypoint triples are
scored by their dispersion across a dataset; the low-dispersion subsets are
frozen and penalized during training so that corrections propagate to
structurally related keypoints.  Angle dispersion uses the circular
standard deviation of unit angle vectors.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .codec import HeatmapStack, KeypointSet
from .errors import DegenerateGeometryError, ShapeError

__all__ = [
    "DistancePair",
    "AngleTriple",
    "MorphologySubsets",
    "SubsetCriterion",
    "LossWeights",
    "MorphologyLossValues",
    "angle_vector",
    "distance_std",
    "angular_std",
    "select_subsets",
    "morphology_loss",
    "heatmap_bce",
    "total_loss",
]

log = logging.getLogger(__name__)

EPS_COINCIDENT = 1e-12
BCE_EPS = 1e-7


@dataclass(frozen=True)
class DistancePair:
    """An index pair (m < n) with the population std of its distance."""

    indices: tuple[int, int]
    population_std: float = 0.0

    def __post_init__(self) -> None:
        m, n = self.indices
        if m >= n:
            raise ShapeError(f"pair indices must satisfy m < n, got {self.indices}")


@dataclass(frozen=True)
class AngleTriple:
    """A canonical index triple (m < n < l), vertex at the middle index n,
    with the circular std of its angle vector."""

    indices: tuple[int, int, int]
    population_circ_std: float = 0.0

    def __post_init__(self) -> None:
        m, n, l = self.indices
        if not (m < n < l):
            raise ShapeError(f"triple indices must satisfy m < n < l, got {self.indices}")


@dataclass
class SubsetCriterion:
    """How to pick the low-dispersion subsets: by thresholds or by sizes."""

    distance_threshold: float | None = None
    angle_threshold: float | None = None
    distance_count: int | None = None
    angle_count: int | None = None

    def __post_init__(self) -> None:
        by_threshold = self.distance_threshold is not None or self.angle_threshold is not None
        by_size = self.distance_count is not None or self.angle_count is not None
        if by_threshold and by_size:
            raise ValueError("choose threshold mode or size mode, not both")
        if not by_threshold and not by_size:
            raise ValueError("criterion needs thresholds or target sizes")
        self.mode = "size" if by_size else "threshold"


@dataclass
class MorphologySubsets:
    """The frozen low-dispersion pair and triple subsets."""

    pairs: list[DistancePair] = field(default_factory=list)
    triples: list[AngleTriple] = field(default_factory=list)
    criterion: dict = field(default_factory=dict)
    skipped_triples: int = 0

    @property
    def pair_indices(self) -> np.ndarray:
        return np.array([p.indices for p in self.pairs], dtype=np.int64).reshape(-1, 2)

    @property
    def triple_indices(self) -> np.ndarray:
        return np.array([t.indices for t in self.triples], dtype=np.int64).reshape(-1, 3)

    def to_json(self) -> dict:
        return {
            "pairs": [[list(p.indices), p.population_std] for p in self.pairs],
            "triples": [[list(t.indices), t.population_circ_std] for t in self.triples],
            "criterion": self.criterion,
            "skipped_triples": self.skipped_triples,
        }

    @classmethod
    def from_json(cls, data: dict) -> "MorphologySubsets":
        return cls(
            pairs=[DistancePair(tuple(i), s) for i, s in data.get("pairs", [])],
            triples=[AngleTriple(tuple(i), s) for i, s in data.get("triples", [])],
            criterion=data.get("criterion", {}),
            skipped_triples=data.get("skipped_triples", 0),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "MorphologySubsets":
        return cls.from_json(json.loads(Path(path).read_text()))

    def fingerprint(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()


@dataclass
class LossWeights:
    """Loss mixing weights: angle term inside the morphology loss, and the
    morphology loss inside the total loss."""

    angle_weight: float = 1.0
    morphology_weight: float = 1.0

    def __post_init__(self) -> None:
        for name in ("angle_weight", "morphology_weight"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")


@dataclass
class MorphologyLossValues:
    distance_loss: float
    angle_loss: float
    morphology_loss: float
    skipped_triples: int = 0


def _stack(dataset: list[KeypointSet] | np.ndarray) -> np.ndarray:
    if isinstance(dataset, np.ndarray):
        pts = np.asarray(dataset, dtype=np.float64)
    else:
        pts = np.stack([kp.points for kp in dataset])
    if pts.ndim != 3 or pts.shape[2] != 2:
        raise ShapeError(f"dataset must stack to (N, K, 2), got {pts.shape}")
    return pts


def angle_vector(points: np.ndarray, triple: tuple[int, int, int]) -> np.ndarray:
    """Unit vector (cos t, sin t) of the signed angle at the triple's vertex.

    The vertex is the middle index; the angle is measured between the rays
    to the first and last indices, so the vector is invariant under rigid
    motion of the keypoints.
    """
    m, n, l = triple
    a = points[m] - points[n]
    b = points[l] - points[n]
    norm = np.linalg.norm(a) * np.linalg.norm(b)
    if norm < EPS_COINCIDENT:
        raise DegenerateGeometryError(f"coincident points in angle triple {triple}")
    return np.array([np.dot(a, b), a[0] * b[1] - a[1] * b[0]]) / norm


def distance_std(dataset: list[KeypointSet] | np.ndarray, pair: tuple[int, int]) -> float:
    """Population standard deviation of the pair's distance across the dataset."""
    pts = _stack(dataset)
    if len(pts) < 2:
        raise ShapeError("need at least 2 samples to estimate dispersion")
    m, n = pair
    dists = np.linalg.norm(pts[:, m] - pts[:, n], axis=1)
    return float(np.std(dists))


def angular_std(dataset: list[KeypointSet] | np.ndarray, triple: tuple[int, int, int]) -> float:
    """Circular standard deviation sqrt(-ln(E[x]^2 + E[y]^2)) of the
    triple's angle vectors across the dataset.

    Raises DegenerateGeometryError if any sample has coincident points in
    the triple.
    """
    pts = _stack(dataset)
    if len(pts) < 2:
        raise ShapeError("need at least 2 samples to estimate dispersion")
    vectors = np.stack([angle_vector(sample, triple) for sample in pts])
    mean = vectors.mean(axis=0)
    resultant_sq = float(mean[0] ** 2 + mean[1] ** 2)
    return float(np.sqrt(-np.log(max(resultant_sq, 1e-300))))


def select_subsets(
    dataset: list[KeypointSet] | np.ndarray, criterion: SubsetCriterion
) -> MorphologySubsets:
    """Score all C(K,2) pairs and C(K,3) canonical triples and keep the
    low-dispersion ones.

    Threshold mode keeps statistics strictly below the threshold; size mode
    keeps the k smallest with deterministic tie-breaking (statistic, then
    lexicographic indices).  Triples that are degenerate in any sample are
    excluded from candidacy and counted.
    """
    pts = _stack(dataset)
    num_kp = pts.shape[1]

    pair_stats = [
        (distance_std(pts, (m, n)), (m, n)) for m, n in combinations(range(num_kp), 2)
    ]
    triple_stats = []
    skipped = 0
    for m, n, l in combinations(range(num_kp), 3):
        try:
            triple_stats.append((angular_std(pts, (m, n, l)), (m, n, l)))
        except DegenerateGeometryError:
            skipped += 1
    if skipped:
        log.warning("excluded %d degenerate angle triples from subset selection", skipped)

    pair_stats.sort(key=lambda s: (s[0], s[1]))
    triple_stats.sort(key=lambda s: (s[0], s[1]))

    if criterion.mode == "threshold":
        t_d = criterion.distance_threshold
        t_a = criterion.angle_threshold
        chosen_pairs = [s for s in pair_stats if t_d is not None and s[0] < t_d]
        chosen_triples = [s for s in triple_stats if t_a is not None and s[0] < t_a]
        meta = {"mode": "threshold", "distance_threshold": t_d, "angle_threshold": t_a}
    else:
        n_d = criterion.distance_count or 0
        n_a = criterion.angle_count or 0
        chosen_pairs = pair_stats[:n_d]
        chosen_triples = triple_stats[:n_a]
        meta = {"mode": "size", "distance_count": n_d, "angle_count": n_a}

    if not chosen_pairs and not chosen_triples:
        log.warning("morphology subset selection is empty; loss degrades to the heatmap term")
    return MorphologySubsets(
        pairs=[DistancePair(idx, std) for std, idx in chosen_pairs],
        triples=[AngleTriple(idx, std) for std, idx in chosen_triples],
        criterion=meta,
        skipped_triples=skipped,
    )


def morphology_loss(
    pred: KeypointSet,
    gt: KeypointSet,
    subsets: MorphologySubsets,
    weights: LossWeights,
) -> MorphologyLossValues:
    """Distance-L1 plus weighted angle-cosine penalty over the frozen subsets.

    Each term is a mean over its subset; empty subsets contribute 0.
    Predicted triples that are degenerate are skipped and counted.
    """
    if len(pred) != len(gt):
        raise ShapeError(f"keypoint count mismatch: {len(pred)} vs {len(gt)}")
    p, g = pred.points, gt.points

    distance_terms = [
        abs(
            np.linalg.norm(p[m] - p[n]) - np.linalg.norm(g[m] - g[n])
        )
        for m, n in (pair.indices for pair in subsets.pairs)
    ]
    l_d = float(np.mean(distance_terms)) if distance_terms else 0.0

    angle_terms = []
    skipped = 0
    for triple in subsets.triples:
        try:
            u_hat = angle_vector(p, triple.indices)
            u = angle_vector(g, triple.indices)
        except DegenerateGeometryError:
            skipped += 1
            continue
        angle_terms.append(1.0 - float(np.dot(u_hat, u)))
    l_a = float(np.mean(angle_terms)) if angle_terms else 0.0

    return MorphologyLossValues(l_d, l_a, l_d + weights.angle_weight * l_a, skipped)


def heatmap_bce(pred_maps: np.ndarray, gt_maps: np.ndarray) -> float:
    """Mean binary cross-entropy between predicted and target heatmaps.

    Predicted values outside (0, 1) are clamped to an epsilon margin and a
    warning is logged.
    """
    p = np.asarray(pred_maps, dtype=np.float64)
    t = np.asarray(gt_maps, dtype=np.float64)
    if p.shape != t.shape:
        raise ShapeError(f"heatmap shape mismatch: {p.shape} vs {t.shape}")
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        log.warning("predicted heatmap values outside (0, 1); clamping with eps=%g", BCE_EPS)
    p = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    return float(-np.mean(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)))


def total_loss(
    pred_heatmaps: HeatmapStack | np.ndarray,
    gt_heatmaps: HeatmapStack | np.ndarray,
    pred_points: KeypointSet,
    gt_points: KeypointSet,
    subsets: MorphologySubsets,
    weights: LossWeights,
) -> float:
    """Heatmap BCE plus the weighted morphology loss."""
    p = pred_heatmaps.maps if isinstance(pred_heatmaps, HeatmapStack) else pred_heatmaps
    t = gt_heatmaps.maps if isinstance(gt_heatmaps, HeatmapStack) else gt_heatmaps
    l_g = heatmap_bce(p, t)
    if weights.morphology_weight == 0.0:
        return l_g
    morph = morphology_loss(pred_points, gt_points, subsets, weights)
    return l_g + weights.morphology_weight * morph.morphology_loss
