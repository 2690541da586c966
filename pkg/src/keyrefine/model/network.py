"""Network modules for interactive keypoint refinement.

The model consumes an image plus two stacks of per-keypoint guidance maps
(the previous prediction and the user-hint heatmaps) and emits per-keypoint
heatmap logits at full input resolution.  User hints additionally feed a
side branch whose features recalibrate the main branch before the
prediction head -- either through channel gating (``v1``) or through a
cross-attention block followed by the same gating (``v2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import torch
import torch.nn.functional as F
from torch import nn

from ..errors import ShapeError

VALID_VARIANTS = ("v1", "v2")
VALID_POOLING = ("max", "average")
VALID_GATE_ACTIVATIONS = ("sigmoid", "softmax")
VALID_HINT_RATIOS = (2, 4, 8)


@dataclass
class ModelConfig:
    """Hyperparameters for :class:`InteractiveKeypointNet`.

    ``hint_downsample`` is the denominator of the hint-branch resolution:
    8 means the hint features live at 1/8 of the input resolution.  The
    main branch always works at 1/4.  ``attention_key_pool`` and
    ``attention_query_pool`` shrink the token grids fed to the attention
    blocks; 1 keeps the full grids.
    """

    num_keypoints: int = 13
    image_channels: int = 1
    variant: str = "v2"
    backbone_width: int = 16
    recalib_channels: int = 32
    hint_channels: int = 16
    hint_downsample: int = 8
    pooling: str = "max"
    gate_activation: str = "sigmoid"
    attention_dim: int = 32
    attention_heads: int = 4
    encoder_layers: int = 1
    decoder_layers: int = 1
    attention_key_pool: int = 1
    attention_query_pool: int = 1
    head_width: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if self.variant not in VALID_VARIANTS:
            raise ValueError(f"variant must be one of {VALID_VARIANTS}, got {self.variant!r}")
        if self.pooling not in VALID_POOLING:
            raise ValueError(f"pooling must be one of {VALID_POOLING}, got {self.pooling!r}")
        if self.gate_activation not in VALID_GATE_ACTIVATIONS:
            raise ValueError(
                f"gate_activation must be one of {VALID_GATE_ACTIVATIONS},"
                f" got {self.gate_activation!r}"
            )
        if self.hint_downsample not in VALID_HINT_RATIOS:
            raise ValueError(
                f"hint_downsample must be one of {VALID_HINT_RATIOS}, got {self.hint_downsample}"
            )
        for name in (
            "num_keypoints",
            "image_channels",
            "backbone_width",
            "recalib_channels",
            "hint_channels",
            "attention_dim",
            "attention_heads",
            "encoder_layers",
            "decoder_layers",
            "attention_key_pool",
            "attention_query_pool",
            "head_width",
        ):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.attention_dim % self.attention_heads != 0:
            raise ValueError("attention_dim must be divisible by attention_heads")
        if self.attention_dim % 4 != 0:
            raise ValueError("attention_dim must be divisible by 4 for 2D positional encoding")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**data)


def _group_norm(channels: int) -> nn.GroupNorm:
    # GroupNorm keeps per-sample statistics, so batch composition never
    # leaks into individual outputs (unlike train-mode BatchNorm).
    groups = math.gcd(4, channels)
    return nn.GroupNorm(groups, channels)


def _conv_block(cin: int, cout: int, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, stride=stride, padding=1),
        _group_norm(cout),
        nn.ReLU(inplace=True),
    )


def sincos_position_encoding(height: int, width: int, dim: int) -> torch.Tensor:
    """2D sine/cosine positional encoding, shape (height*width, dim).

    Rows are flattened row-major (y outer, x inner) to match
    ``tensor.flatten(start_dim)`` on feature maps.  Positions are grid
    midpoints normalised to [0, 1] so grids of different sizes covering
    the same image extent produce spatially aligned encodings.
    """
    if dim % 4 != 0:
        raise ValueError("positional encoding dim must be divisible by 4")
    quarter = dim // 4
    freqs = torch.exp(-math.log(100.0) * torch.arange(quarter, dtype=torch.float64) / quarter)
    ys = (torch.arange(height, dtype=torch.float64) + 0.5) / height
    xs = (torch.arange(width, dtype=torch.float64) + 0.5) / width
    grid_y, grid_x = torch.meshgrid(ys, xs, indexing="ij")
    ang_x = grid_x.reshape(-1, 1) * freqs * 2.0 * math.pi
    ang_y = grid_y.reshape(-1, 1) * freqs * 2.0 * math.pi
    enc = torch.cat([ang_x.sin(), ang_x.cos(), ang_y.sin(), ang_y.cos()], dim=1)
    return enc.to(torch.float32)


class Backbone(nn.Module):
    """Convolutional encoder producing the shared 1/4-resolution features.

    Returns ``(branch_feats, main_feats)``: a slim projection feeding the
    hint branch and the wider map feeding recalibration and the head.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        w = config.backbone_width
        cin = config.image_channels + 2 * config.num_keypoints
        self.stem = nn.Sequential(_conv_block(cin, w, stride=2), _conv_block(w, w))
        self.stage = nn.Sequential(_conv_block(w, 2 * w, stride=2), _conv_block(2 * w, 2 * w))
        self.branch_proj = nn.Conv2d(2 * w, config.hint_channels, 1)
        self.main_proj = _conv_block(2 * w, config.recalib_channels)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        feats = self.stage(self.stem(x))
        return self.branch_proj(feats), self.main_proj(feats)


class HintEncoder(nn.Module):
    """Fuses user-hint heatmaps with backbone features at the hint resolution."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        c = config.hint_channels
        self.merge = _conv_block(c + config.num_keypoints, c)
        if config.hint_downsample == 8:
            self.resize: nn.Module = _conv_block(c, c, stride=2)
        elif config.hint_downsample == 2:
            self.resize = nn.Sequential(
                nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False),
                _conv_block(c, c),
            )
        else:
            self.resize = _conv_block(c, c)

    def forward(self, branch_feats: torch.Tensor, hints: torch.Tensor) -> torch.Tensor:
        pooled_hints = F.avg_pool2d(hints, kernel_size=4)
        merged = self.merge(torch.cat([branch_feats, pooled_hints], dim=1))
        return self.resize(merged)


class GatingRecalibration(nn.Module):
    """Channel gating of the main features driven by pooled hint features."""

    def __init__(
        self,
        hint_channels: int,
        main_channels: int,
        pooling: str = "max",
        activation: str = "sigmoid",
    ):
        super().__init__()
        if pooling not in VALID_POOLING:
            raise ValueError(f"pooling must be one of {VALID_POOLING}")
        if activation not in VALID_GATE_ACTIVATIONS:
            raise ValueError(f"activation must be one of {VALID_GATE_ACTIVATIONS}")
        self.pooling = pooling
        self.activation = activation
        hidden = max(4, hint_channels // 2)
        self.fc = nn.Sequential(
            nn.Linear(hint_channels, hidden),
            nn.ReLU(inplace=True),
            nn.Linear(hidden, main_channels),
        )

    def gates(self, hint_feats: torch.Tensor) -> torch.Tensor:
        """Per-channel gate values, shape (batch, main_channels)."""
        if self.pooling == "max":
            pooled = hint_feats.amax(dim=(2, 3))
        else:
            pooled = hint_feats.mean(dim=(2, 3))
        logits = self.fc(pooled)
        if self.activation == "sigmoid":
            return torch.sigmoid(logits)
        return torch.softmax(logits, dim=1)

    def forward(self, main_feats: torch.Tensor, hint_feats: torch.Tensor) -> torch.Tensor:
        gate = self.gates(hint_feats)
        return main_feats * gate[:, :, None, None]


class _EncoderLayer(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim)
        self.ffn = nn.Sequential(nn.Linear(dim, 2 * dim), nn.ReLU(inplace=True), nn.Linear(2 * dim, dim))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.norm1(x)
        x = x + self.attn(h, h, h, need_weights=False)[0]
        return x + self.ffn(self.norm2(x))


class _DecoderLayer(nn.Module):
    """Cross-attention layer: queries from the main branch, keys/values from hints."""

    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.norm_q = nn.LayerNorm(dim)
        self.norm_kv = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim)
        self.ffn = nn.Sequential(nn.Linear(dim, 2 * dim), nn.ReLU(inplace=True), nn.Linear(2 * dim, dim))
        self.last_weights: torch.Tensor | None = None

    def forward(
        self, queries: torch.Tensor, memory: torch.Tensor, keep_weights: bool = False
    ) -> torch.Tensor:
        attended, weights = self.attn(
            self.norm_q(queries),
            self.norm_kv(memory),
            self.norm_kv(memory),
            need_weights=keep_weights,
            average_attn_weights=False,
        )
        self.last_weights = weights if keep_weights else None
        queries = queries + attended
        return queries + self.ffn(self.norm2(queries))


class CrossAttentionRecalibration(nn.Module):
    """Attention-based recalibration followed by channel gating.

    Hint features are self-attended, then queried from the main-branch
    positions; the attended result is added back onto the main features
    before the gate multiplies them.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        d = config.attention_dim
        self.key_pool = config.attention_key_pool
        self.query_pool = config.attention_query_pool
        self.proj_kv = nn.Conv2d(config.hint_channels, d, 1)
        self.proj_q = nn.Conv2d(config.recalib_channels, d, 1)
        self.encoder = nn.ModuleList(
            _EncoderLayer(d, config.attention_heads) for _ in range(config.encoder_layers)
        )
        self.decoder = nn.ModuleList(
            _DecoderLayer(d, config.attention_heads) for _ in range(config.decoder_layers)
        )
        self.out_proj = nn.Conv2d(d, config.recalib_channels, 1)
        self.gate = GatingRecalibration(
            config.hint_channels,
            config.recalib_channels,
            pooling=config.pooling,
            activation=config.gate_activation,
        )
        self._pe_cache: dict[tuple[int, int], torch.Tensor] = {}

    def _encoding(self, height: int, width: int, dim: int, device: torch.device, dtype) -> torch.Tensor:
        key = (height, width)
        if key not in self._pe_cache:
            self._pe_cache[key] = sincos_position_encoding(height, width, dim)
        return self._pe_cache[key].to(device=device, dtype=dtype)

    @staticmethod
    def _pool(feats: torch.Tensor, factor: int) -> torch.Tensor:
        if factor == 1:
            return feats
        h = max(1, feats.shape[2] // factor)
        w = max(1, feats.shape[3] // factor)
        return F.adaptive_avg_pool2d(feats, (h, w))

    def forward(
        self,
        main_feats: torch.Tensor,
        hint_feats: torch.Tensor,
        keep_weights: bool = False,
    ) -> torch.Tensor:
        d = self.proj_kv.out_channels
        kv_map = self._pool(self.proj_kv(hint_feats), self.key_pool)
        q_map = self._pool(self.proj_q(main_feats), self.query_pool)
        kh, kw = kv_map.shape[2:]
        qh, qw = q_map.shape[2:]

        memory = kv_map.flatten(2).transpose(1, 2)
        memory = memory + self._encoding(kh, kw, d, memory.device, memory.dtype)
        for layer in self.encoder:
            memory = layer(memory)

        queries = q_map.flatten(2).transpose(1, 2)
        queries = queries + self._encoding(qh, qw, d, queries.device, queries.dtype)
        for layer in self.decoder:
            queries = layer(queries, memory, keep_weights=keep_weights)

        attended = queries.transpose(1, 2).reshape(-1, d, qh, qw)
        if (qh, qw) != main_feats.shape[2:]:
            attended = F.interpolate(
                attended, size=main_feats.shape[2:], mode="bilinear", align_corners=False
            )
        fused = main_feats + self.out_proj(attended)
        return self.gate(fused, hint_feats)

    @property
    def last_attention_weights(self) -> torch.Tensor | None:
        """Per-head cross-attention weights from the final decoder layer."""
        return self.decoder[-1].last_weights


class PredictionHead(nn.Module):
    """Maps recalibrated features to full-resolution per-keypoint logits."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.conv = _conv_block(config.recalib_channels, config.head_width)
        self.out = nn.Conv2d(config.head_width, config.num_keypoints, 1)

    def forward(self, feats: torch.Tensor, out_size: tuple[int, int]) -> torch.Tensor:
        logits = self.out(self.conv(feats))
        if logits.shape[2:] != out_size:
            logits = F.interpolate(logits, size=out_size, mode="bilinear", align_corners=False)
        return logits


class InteractiveKeypointNet(nn.Module):
    """Heatmap regressor with a hint-conditioned recalibration branch."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.backbone = Backbone(config)
        self.hint_encoder = HintEncoder(config)
        if config.variant == "v1":
            self.recalibration: nn.Module = GatingRecalibration(
                config.hint_channels,
                config.recalib_channels,
                pooling=config.pooling,
                activation=config.gate_activation,
            )
        else:
            self.recalibration = CrossAttentionRecalibration(config)
        self.head = PredictionHead(config)

    def _check_inputs(self, image: torch.Tensor, prev: torch.Tensor, hints: torch.Tensor) -> None:
        if image.ndim != 4 or prev.ndim != 4 or hints.ndim != 4:
            raise ShapeError("model inputs must be 4D (batch, channels, height, width)")
        b, _, h, w = image.shape
        k = self.config.num_keypoints
        if image.shape[1] != self.config.image_channels:
            raise ShapeError(
                f"expected {self.config.image_channels} image channels, got {image.shape[1]}"
            )
        if prev.shape != (b, k, h, w) or hints.shape != (b, k, h, w):
            raise ShapeError(
                f"guidance maps must have shape ({b}, {k}, {h}, {w});"
                f" got prev {tuple(prev.shape)}, hints {tuple(hints.shape)}"
            )
        if h % 8 != 0 or w % 8 != 0:
            raise ShapeError(f"input height and width must be multiples of 8, got {h}x{w}")

    def hint_features(self, branch_feats: torch.Tensor, hints: torch.Tensor) -> torch.Tensor:
        return self.hint_encoder(branch_feats, hints)

    def forward(
        self, image: torch.Tensor, prev: torch.Tensor, hints: torch.Tensor
    ) -> torch.Tensor:
        self._check_inputs(image, prev, hints)
        x = torch.cat([image, prev, hints], dim=1)
        branch_feats, main_feats = self.backbone(x)
        hint_feats = self.hint_encoder(branch_feats, hints)
        recalibrated = self.recalibration(main_feats, hint_feats)
        return self.head(recalibrated, image.shape[2:])


def build_model(config: ModelConfig) -> InteractiveKeypointNet:
    """Construct a model with weights seeded from ``config.seed``."""
    generator_state = torch.random.get_rng_state()
    try:
        torch.manual_seed(config.seed)
        model = InteractiveKeypointNet(config)
    finally:
        torch.random.set_rng_state(generator_state)
    return model


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())
