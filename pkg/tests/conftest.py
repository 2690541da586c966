"""Shared fixtures: tiny model configs and synthetic keypoint datasets."""

import numpy as np
import pytest

from keyrefine.codec import GaussianParams
from keyrefine.model import ModelConfig, build_model

# Release-gate results, echoed at the end of the run so a long suite still
# ends with one scannable PASS/FAIL line per guarantee.
_GATE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one gate line; returns the verdict so tests can batch asserts."""

    def record(name: str, ok: bool, detail: str) -> bool:
        line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})"
        print(line)
        _GATE_LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _GATE_LINES:
        terminalreporter.section("acceptance gate")
        for line in _GATE_LINES:
            terminalreporter.line(line)


@pytest.fixture
def params() -> GaussianParams:
    return GaussianParams(sigma_heatmap=2.0, sigma_hint=2.0, patch_radius=3)


@pytest.fixture
def tiny_config() -> ModelConfig:
    # Smallest v2 that still exercises every code path; fast on one core.
    return ModelConfig(
        num_keypoints=4,
        backbone_width=8,
        recalib_channels=8,
        hint_channels=8,
        hint_downsample=4,
        attention_dim=8,
        attention_heads=2,
        head_width=8,
        seed=0,
    )


@pytest.fixture
def tiny_model(tiny_config):
    return build_model(tiny_config)


def random_keypoint_dataset(num_samples: int, num_keypoints: int, seed: int) -> np.ndarray:
    """(N, K, 2) cloud with per-keypoint anchors so dispersions differ."""
    rng = np.random.default_rng(seed)
    anchors = rng.uniform(10.0, 90.0, size=(num_keypoints, 2))
    spread = rng.uniform(0.5, 6.0, size=(num_keypoints, 1))
    noise = rng.normal(size=(num_samples, num_keypoints, 2))
    return anchors[None] + spread[None] * noise
