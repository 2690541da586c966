"""Builds a running service (store + model + cohort + app) from a config."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI

from ..codec import GaussianParams
from ..config import WorkbenchConfig
from ..cvm import CERVICAL_KEYPOINT_NAMES
from ..datasets import DatasetManifest
from ..growth import CohortRecord, read_cohort
from ..model.checkpoint import load_checkpoint
from ..model.network import InteractiveKeypointNet, build_model
from .app import create_app
from .sessions import SessionManager
from .store import SessionStore

log = logging.getLogger(__name__)


@dataclass
class ServiceRuntime:
    app: FastAPI
    manager: SessionManager
    store: SessionStore
    cohort: list[CohortRecord]
    working_size: tuple[int, int] | None


def default_cohort(seed: int = 0) -> list[CohortRecord]:
    from ..synthetic import resample_reference_cohort

    return resample_reference_cohort("female", seed=seed) + resample_reference_cohort(
        "male", seed=seed + 1
    )


def _generic_names(count: int) -> tuple[str, ...]:
    if count == len(CERVICAL_KEYPOINT_NAMES):
        return CERVICAL_KEYPOINT_NAMES
    return tuple(f"kp_{i:02d}" for i in range(count))


def assemble_service(config: WorkbenchConfig) -> ServiceRuntime:
    data_root = config.data_path
    checkpoint_path = data_root / config.train.checkpoint

    keypoint_names: tuple[str, ...] | None = None
    working_size: tuple[int, int] | None = None
    manifest_path = config.dataset_path / "manifest.json"
    if manifest_path.exists():
        manifest = DatasetManifest.load(manifest_path)
        keypoint_names = manifest.keypoint_names
        working_size = manifest.image_size

    if checkpoint_path.exists():
        loaded = load_checkpoint(checkpoint_path)
        model: InteractiveKeypointNet = loaded.model
        params: GaussianParams = loaded.params
        meta_names = loaded.meta.get("keypoint_names")
        if meta_names:
            keypoint_names = tuple(meta_names)
        meta_size = loaded.meta.get("image_size")
        if meta_size:
            working_size = (int(meta_size[0]), int(meta_size[1]))
    else:
        log.warning(
            "checkpoint %s not found; serving an untrained seed-%d model",
            checkpoint_path,
            config.model.seed,
        )
        model = build_model(config.model)
        model.eval()
        params = config.codec

    if keypoint_names is None:
        keypoint_names = _generic_names(model.config.num_keypoints)

    store = SessionStore(
        data_root / config.service.store, data_root / config.service.images
    )
    manager = SessionManager(store, model, params, keypoint_names)

    if config.growth.cohort is not None:
        cohort = read_cohort(data_root / config.growth.cohort)
    else:
        cohort = default_cohort()

    app = create_app(manager, cohort, data_root=data_root, working_size=working_size)
    return ServiceRuntime(
        app=app, manager=manager, store=store, cohort=cohort, working_size=working_size
    )
