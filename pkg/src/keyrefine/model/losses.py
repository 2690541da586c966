"""Batched torch counterparts of the numpy loss functions.

Same semantics as :mod:`keyrefine.morphology`: distance terms are L1
errors on subset pair distances, angle terms are ``1 - cos`` of the
angle-vector mismatch, and triples degenerate in either prediction or
target are skipped (and counted).  Means run over batch and subset
members jointly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

from ..morphology import EPS_COINCIDENT, LossWeights, MorphologySubsets
from .decode import soft_argmax_coords


@dataclass
class TrainingLossTerms:
    """Scalar loss components for one step; tensors keep the graph alive."""

    total: torch.Tensor
    heatmap: torch.Tensor
    distance: torch.Tensor | None = None
    angle: torch.Tensor | None = None
    skipped_triples: int = 0

    def detached(self) -> dict[str, float]:
        out = {"total": float(self.total), "heatmap": float(self.heatmap)}
        if self.distance is not None:
            out["distance"] = float(self.distance)
        if self.angle is not None:
            out["angle"] = float(self.angle)
        return out


def _angle_vectors(
    coords: torch.Tensor, triples: torch.Tensor
) -> tuple[torch.Tensor, torch.Tensor]:
    """Unit angle vectors (batch, T, 2) and validity mask (batch, T)."""
    a = coords[:, triples[:, 0]] - coords[:, triples[:, 1]]
    b = coords[:, triples[:, 2]] - coords[:, triples[:, 1]]
    norm = torch.linalg.norm(a, dim=2) * torch.linalg.norm(b, dim=2)
    valid = norm >= EPS_COINCIDENT
    safe = norm.clamp_min(EPS_COINCIDENT)
    dot = (a * b).sum(dim=2)
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return torch.stack([dot, cross], dim=2) / safe[..., None], valid


def morphology_terms(
    pred_coords: torch.Tensor,
    gt_coords: torch.Tensor,
    subsets: MorphologySubsets,
    device: torch.device | None = None,
) -> tuple[torch.Tensor, torch.Tensor, int]:
    """(distance_loss, angle_loss, skipped_triples) for batched coordinates."""
    if pred_coords.shape != gt_coords.shape:
        raise ValueError(
            f"coordinate shape mismatch: {tuple(pred_coords.shape)} vs {tuple(gt_coords.shape)}"
        )
    dtype = pred_coords.dtype
    zero = torch.zeros((), dtype=dtype, device=pred_coords.device)

    pair_idx = subsets.pair_indices
    if len(pair_idx):
        pairs = torch.as_tensor(pair_idx, device=pred_coords.device)
        d_pred = torch.linalg.norm(
            pred_coords[:, pairs[:, 0]] - pred_coords[:, pairs[:, 1]], dim=2
        )
        d_gt = torch.linalg.norm(gt_coords[:, pairs[:, 0]] - gt_coords[:, pairs[:, 1]], dim=2)
        distance_loss = (d_pred - d_gt).abs().mean()
    else:
        distance_loss = zero

    triple_idx = subsets.triple_indices
    skipped = 0
    if len(triple_idx):
        triples = torch.as_tensor(triple_idx, device=pred_coords.device)
        u_pred, pred_ok = _angle_vectors(pred_coords, triples)
        u_gt, gt_ok = _angle_vectors(gt_coords, triples)
        mask = pred_ok & gt_ok
        terms = (1.0 - (u_pred * u_gt).sum(dim=2)) * mask
        count = int(mask.sum())
        skipped = mask.numel() - count
        angle_loss = terms.sum() / max(count, 1) if count else zero
    else:
        angle_loss = zero

    return distance_loss, angle_loss, skipped


def training_loss(
    logits: torch.Tensor,
    gt_maps: torch.Tensor,
    gt_points: torch.Tensor,
    subsets: MorphologySubsets,
    weights: LossWeights,
    patch_radius: int = 3,
    temperature: float = 0.025,
) -> TrainingLossTerms:
    """Heatmap BCE plus the weighted morphology loss on decoded coordinates.

    ``logits`` are pre-sigmoid heatmaps; BCE-with-logits keeps the term
    numerically stable.  When ``morphology_weight`` is zero the decode is
    skipped entirely.
    """
    heatmap_loss = F.binary_cross_entropy_with_logits(logits, gt_maps)
    if weights.morphology_weight == 0.0:
        return TrainingLossTerms(total=heatmap_loss, heatmap=heatmap_loss)

    probs = torch.sigmoid(logits)
    coords = soft_argmax_coords(probs, patch_radius=patch_radius, temperature=temperature)
    gt = gt_points.to(coords.dtype)
    distance_loss, angle_loss, skipped = morphology_terms(coords, gt, subsets)
    morph = distance_loss + weights.angle_weight * angle_loss
    total = heatmap_loss + weights.morphology_weight * morph
    return TrainingLossTerms(
        total=total,
        heatmap=heatmap_loss,
        distance=distance_loss,
        angle=angle_loss,
        skipped_triples=skipped,
    )


def numpy_coords(coords: torch.Tensor) -> np.ndarray:
    return coords.detach().cpu().numpy().astype(np.float64)
