"""Differentiable local soft-argmax for batched heatmaps.

Training needs coordinates with gradients attached, so this mirrors the
numpy decoder in :mod:`keyrefine.codec` but stays inside autograd: pick
the argmax pixel, softmax the surrounding patch values, and add the
expected sub-pixel offset.  Gradients flow through the patch weights.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

# Padding value for out-of-frame patch cells.  After max-subtraction the
# exponent underflows to exactly 0, so padded cells get zero weight --
# identical to cropping the patch at the border, which the numpy decoder
# does.
_PAD_VALUE = -1.0e4


def soft_argmax_coords(
    maps: torch.Tensor, patch_radius: int = 3, temperature: float = 0.025
) -> torch.Tensor:
    """Decode (batch, K, H, W) heatmaps to (batch, K, 2) xy coordinates."""
    if maps.ndim != 4:
        raise ValueError(f"expected 4D heatmaps, got shape {tuple(maps.shape)}")
    if patch_radius < 0:
        raise ValueError("patch_radius must be >= 0")
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    batch, num_maps, height, width = maps.shape
    flat_idx = maps.flatten(2).argmax(dim=2)
    peak_y = (flat_idx // width).to(maps.dtype)
    peak_x = (flat_idx % width).to(maps.dtype)
    if patch_radius == 0:
        return torch.stack([peak_x, peak_y], dim=2)

    r = patch_radius
    padded = F.pad(maps, (r, r, r, r), value=_PAD_VALUE)
    offsets = torch.arange(-r, r + 1, device=maps.device)
    iy = (flat_idx // width)[:, :, None, None] + offsets[None, None, :, None] + r
    ix = (flat_idx % width)[:, :, None, None] + offsets[None, None, None, :] + r
    b_idx = torch.arange(batch, device=maps.device)[:, None, None, None]
    k_idx = torch.arange(num_maps, device=maps.device)[None, :, None, None]
    patches = padded[b_idx, k_idx, iy, ix]

    weights = torch.softmax((patches / temperature).flatten(2), dim=2)
    weights = weights.view(batch, num_maps, 2 * r + 1, 2 * r + 1)
    offs = offsets.to(maps.dtype)
    dx = (weights * offs[None, None, None, :]).sum(dim=(2, 3))
    dy = (weights * offs[None, None, :, None]).sum(dim=(2, 3))
    return torch.stack([peak_x + dx, peak_y + dy], dim=2)
