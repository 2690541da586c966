"""Request/response bodies for the annotation HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    image_base64: str | None = None
    image_ref: str | None = Field(
        default=None, description="Path of a server-side image, relative to the data root"
    )
    age: float | None = Field(default=None, ge=0.0, le=120.0)
    sex: str | None = Field(default=None, pattern="^[FM]$")
    patient_id: str | None = None


class KeypointOut(BaseModel):
    index: int
    name: str
    x: float
    y: float
    confidence: float


class RoundOut(BaseModel):
    round_index: int
    correction: dict | None
    keypoints: list[KeypointOut]


class SessionOut(BaseModel):
    session_id: str
    status: str
    image_sha: str
    width: int
    height: int
    keypoint_names: list[str]
    age: float | None
    sex: str | None
    patient_id: str | None
    rounds: list[RoundOut]


class CorrectionRequest(BaseModel):
    keypoint_index: int = Field(ge=0)
    x: float
    y: float


class CvmOut(BaseModel):
    session_id: str
    round_index: int
    features: dict[str, float]
    feature_vector: list[float]
    stage: str | None
    stage_feature: str
    stage_window: list[float] | None
    sensitivity: float
    error_tolerance_px: float


class GrowthPeakOut(BaseModel):
    age: int
    rate: float
    interval: list[int]
    prev_median: float
    peak_median: float
    next_median: float | None


class GrowthCurveOut(BaseModel):
    sex: str
    feature: str
    ages: list[int]
    quantiles: dict[str, list[float]]
    counts: list[int]
    annual_rates: list[dict]
    peak: GrowthPeakOut
    stage_window: list[float] | None


class HealthOut(BaseModel):
    status: str
    model_variant: str
    num_keypoints: int
    keypoint_names: list[str]
    sessions: int
