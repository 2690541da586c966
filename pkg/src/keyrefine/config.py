"""One YAML config drives every CLI subcommand and the service.

Only two environment overrides exist: ``KEYREFINE_PORT`` (service port)
and ``KEYREFINE_DATA_ROOT`` (where datasets, checkpoints, and the session
store live).  Everything else comes from the file; missing sections fall
back to defaults, unknown keys are rejected.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .codec import GaussianParams
from .errors import WorkbenchError
from .model.network import ModelConfig

ENV_PORT = "KEYREFINE_PORT"
ENV_DATA_ROOT = "KEYREFINE_DATA_ROOT"


@dataclass
class TrainSettings:
    steps: int = 400
    batch_size: int = 4
    learning_rate: float = 1e-3
    seed: int = 0
    morphology_weight: float = 1.0
    angle_weight: float = 1.0
    distance_count: int = 8
    angle_count: int = 8
    train_fraction: float = 0.8
    checkpoint: str = "checkpoints/model.pt"
    log_every: int = 50


@dataclass
class EvalSettings:
    max_clicks: int = 5
    target_mre: float = 2.0
    correction_policy: str = "worst-first"
    revision: str = "model"
    split: str = "val"
    report: str = "reports/eval.json"


@dataclass
class SimulateSettings:
    generator: str = "spine"  # spine | cervical
    num_images: int = 200
    seed: int = 0
    name: str = "synthetic"


@dataclass
class ServiceSettings:
    host: str = "127.0.0.1"
    port: int = 8008
    store: str = "sessions.sqlite"
    images: str = "uploads"


@dataclass
class GrowthSettings:
    cohort: str | None = None  # JSONL of {age, sex, values}; None -> bundled demo
    sex: str = "female"
    feature: str = "length_width_c3"


@dataclass
class WorkbenchConfig:
    data_root: str = "data"
    dataset: str = "synthetic"
    codec: GaussianParams = field(default_factory=GaussianParams)
    model: ModelConfig = field(default_factory=lambda: ModelConfig(num_keypoints=8))
    train: TrainSettings = field(default_factory=TrainSettings)
    eval: EvalSettings = field(default_factory=EvalSettings)
    simulate: SimulateSettings = field(default_factory=SimulateSettings)
    service: ServiceSettings = field(default_factory=ServiceSettings)
    growth: GrowthSettings = field(default_factory=GrowthSettings)

    @property
    def data_path(self) -> Path:
        return Path(self.data_root)

    @property
    def dataset_path(self) -> Path:
        return self.data_path / self.dataset

    def to_dict(self) -> dict:
        return asdict(self)


def _build_section(cls, data: dict | None, section: str):
    data = data or {}
    if not isinstance(data, dict):
        raise WorkbenchError(f"config section {section!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise WorkbenchError(f"unknown keys in config section {section!r}: {sorted(unknown)}")
    return cls(**data)


def load_config(
    path: str | Path | None = None, env: dict[str, str] | None = None
) -> WorkbenchConfig:
    """Read the config file (if given) and apply environment overrides."""
    env = os.environ if env is None else env
    raw: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise WorkbenchError(f"config file not found: {path}")
        loaded = yaml.safe_load(path.read_text())
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise WorkbenchError(f"config root must be a mapping, got {type(loaded).__name__}")
        raw = loaded

    known = {f.name for f in fields(WorkbenchConfig)}
    unknown = set(raw) - known
    if unknown:
        raise WorkbenchError(f"unknown top-level config keys: {sorted(unknown)}")

    config = WorkbenchConfig(
        data_root=raw.get("data_root", "data"),
        dataset=raw.get("dataset", "synthetic"),
        codec=_build_section(GaussianParams, raw.get("codec"), "codec"),
        model=ModelConfig.from_dict({"num_keypoints": 8, **(raw.get("model") or {})}),
        train=_build_section(TrainSettings, raw.get("train"), "train"),
        eval=_build_section(EvalSettings, raw.get("eval"), "eval"),
        simulate=_build_section(SimulateSettings, raw.get("simulate"), "simulate"),
        service=_build_section(ServiceSettings, raw.get("service"), "service"),
        growth=_build_section(GrowthSettings, raw.get("growth"), "growth"),
    )

    if ENV_DATA_ROOT in env:
        config.data_root = env[ENV_DATA_ROOT]
    if ENV_PORT in env:
        try:
            config.service.port = int(env[ENV_PORT])
        except ValueError as exc:
            raise WorkbenchError(f"{ENV_PORT} must be an integer, got {env[ENV_PORT]!r}") from exc
    return config


def dump_config(config: WorkbenchConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(config.to_dict(), sort_keys=False))
