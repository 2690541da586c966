"""Self-describing checkpoints: weights plus everything needed to reuse them.

A checkpoint restores without external context -- it carries the model
config, the Gaussian codec parameters, the frozen morphology subsets
(with fingerprint), and free-form metadata such as the dataset name.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import torch

from ..codec import GaussianParams
from ..errors import WorkbenchError
from ..morphology import MorphologySubsets
from .network import InteractiveKeypointNet, ModelConfig

FORMAT_VERSION = 1


@dataclass
class LoadedModel:
    """A restored model together with its companion artifacts."""

    model: InteractiveKeypointNet
    config: ModelConfig
    params: GaussianParams
    subsets: MorphologySubsets
    meta: dict


def save_checkpoint(
    path: str | Path,
    model: InteractiveKeypointNet,
    params: GaussianParams,
    subsets: MorphologySubsets,
    meta: dict | None = None,
) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "model_config": model.config.to_dict(),
        "state_dict": model.state_dict(),
        "gaussian_params": asdict(params),
        "subsets": subsets.to_json(),
        "subsets_fingerprint": subsets.fingerprint(),
        "meta": dict(meta or {}),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)


def load_checkpoint(path: str | Path) -> LoadedModel:
    path = Path(path)
    if not path.exists():
        raise WorkbenchError(f"checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=True)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise WorkbenchError(f"unsupported checkpoint format version: {version!r}")
    config = ModelConfig.from_dict(payload["model_config"])
    model = InteractiveKeypointNet(config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    subsets = MorphologySubsets.from_json(payload["subsets"])
    stored = payload.get("subsets_fingerprint")
    if stored and stored != subsets.fingerprint():
        raise WorkbenchError("checkpoint subset fingerprint does not match its subsets")
    params = GaussianParams(**payload["gaussian_params"])
    return LoadedModel(
        model=model,
        config=config,
        params=params,
        subsets=subsets,
        meta=payload.get("meta", {}),
    )
