"""FastAPI application wiring the annotation workflow over HTTP.

All state lives in the session store and the loaded model; handlers are
thin adapters between the JSON schemas and the core library.
"""

from __future__ import annotations

import base64
import binascii
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from ..codec import GaussianParams
from ..cvm import (
    CVM_FEATURE_NAMES,
    NUM_CERVICAL_KEYPOINTS,
    cvm_features,
    error_tolerance_px,
    sensitivity_analysis,
)
from ..errors import KeypointIndexError, SessionError, WorkbenchError
from ..growth import (
    SEXES,
    CohortRecord,
    annual_growth_rate,
    find_growth_peak,
    growth_potential_stage,
    peak_stage_window,
    standard_growth_curve,
)
from ..model.network import InteractiveKeypointNet
from .schemas import (
    CorrectionRequest,
    CreateSessionRequest,
    CvmOut,
    GrowthCurveOut,
    GrowthPeakOut,
    HealthOut,
    KeypointOut,
    RoundOut,
    SessionOut,
)
from .sessions import SessionManager
from .store import SessionRecord, SessionStore

STAGE_FEATURE = "length_width_c3"
_SEX_ALIASES = {"F": "female", "M": "male", "female": "female", "male": "male"}


def _session_out(record: SessionRecord) -> SessionOut:
    rounds = [
        RoundOut(
            round_index=r.round_index,
            correction=r.correction,
            keypoints=[
                KeypointOut(
                    index=i,
                    name=record.keypoint_names[i],
                    x=float(x),
                    y=float(y),
                    confidence=float(r.confidence[i]) if i < len(r.confidence) else 0.0,
                )
                for i, (x, y) in enumerate(r.points)
            ],
        )
        for r in record.rounds
    ]
    return SessionOut(
        session_id=record.session_id,
        status=record.status,
        image_sha=record.image_sha,
        width=record.width,
        height=record.height,
        keypoint_names=list(record.keypoint_names),
        age=record.age,
        sex=record.sex,
        patient_id=record.patient_id,
        rounds=rounds,
    )


def create_app(
    manager: SessionManager,
    cohort: list[CohortRecord],
    data_root: str | Path = "data",
    working_size: tuple[int, int] | None = None,
) -> FastAPI:
    app = FastAPI(title="keyrefine annotation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    data_root = Path(data_root)

    def _get_session(session_id: str) -> SessionRecord:
        try:
            return manager.store.get_session(session_id)
        except SessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    def _peak_for(sex: str, feature: str):
        records = [r for r in cohort if r.sex == sex and feature in r.values]
        if not records:
            return None
        curve = standard_growth_curve(records, feature, sex)
        return curve, find_growth_peak(curve)

    @app.get("/health", response_model=HealthOut)
    def health() -> HealthOut:
        config = manager.model.config
        return HealthOut(
            status="ok",
            model_variant=config.variant,
            num_keypoints=config.num_keypoints,
            keypoint_names=list(manager.keypoint_names),
            sessions=len(manager.store.list_sessions()),
        )

    @app.post("/sessions", response_model=SessionOut, status_code=201)
    def create_session(body: CreateSessionRequest) -> SessionOut:
        if (body.image_base64 is None) == (body.image_ref is None):
            raise HTTPException(
                status_code=422,
                detail="provide exactly one of image_base64 or image_ref",
            )
        if body.image_base64 is not None:
            try:
                image_bytes = base64.b64decode(body.image_base64, validate=True)
            except (binascii.Error, ValueError) as exc:
                raise HTTPException(status_code=422, detail=f"invalid base64: {exc}") from exc
        else:
            ref = (data_root / body.image_ref).resolve()
            if not str(ref).startswith(str(data_root.resolve())):
                raise HTTPException(status_code=422, detail="image_ref escapes the data root")
            if not ref.exists():
                raise HTTPException(status_code=404, detail=f"image_ref not found: {body.image_ref}")
            image_bytes = ref.read_bytes()
        try:
            record = manager.create_session(
                image_bytes,
                age=body.age,
                sex=body.sex,
                patient_id=body.patient_id,
                size=working_size,
            )
        except SessionError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except WorkbenchError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return _session_out(record)

    @app.get("/sessions/{session_id}", response_model=SessionOut)
    def get_session(session_id: str) -> SessionOut:
        return _session_out(_get_session(session_id))

    @app.post("/sessions/{session_id}/corrections", response_model=SessionOut)
    def submit_correction(session_id: str, body: CorrectionRequest) -> SessionOut:
        _get_session(session_id)
        try:
            record = manager.submit_correction(session_id, body.keypoint_index, body.x, body.y)
        except KeypointIndexError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except WorkbenchError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return _session_out(record)

    @app.get("/sessions/{session_id}/cvm", response_model=CvmOut)
    def get_cvm(session_id: str) -> CvmOut:
        record = _get_session(session_id)
        if len(record.keypoint_names) != NUM_CERVICAL_KEYPOINTS:
            raise HTTPException(
                status_code=422,
                detail=(
                    f"CVM features need the {NUM_CERVICAL_KEYPOINTS}-keypoint cervical"
                    f" schema; this session has {len(record.keypoint_names)} keypoints"
                ),
            )
        points = record.latest_points
        try:
            features = cvm_features(points)
            sensitivity = sensitivity_analysis(points)
        except WorkbenchError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

        stage = None
        window = None
        sex = _SEX_ALIASES.get(record.sex or "")
        if sex is not None:
            found = _peak_for(sex, STAGE_FEATURE)
            if found is not None:
                _, peak = found
                if peak.next_median is not None:
                    stage = growth_potential_stage(features[STAGE_FEATURE], peak)
                    w = peak_stage_window(peak)
                    window = [w.lower, w.upper]
        return CvmOut(
            session_id=session_id,
            round_index=record.rounds[-1].round_index,
            features=features,
            feature_vector=[features[name] for name in CVM_FEATURE_NAMES],
            stage=stage,
            stage_feature=STAGE_FEATURE,
            stage_window=window,
            sensitivity=sensitivity,
            error_tolerance_px=error_tolerance_px(sensitivity),
        )

    @app.get("/growth/curves", response_model=GrowthCurveOut)
    def growth_curves(sex: str, feature: str = STAGE_FEATURE) -> GrowthCurveOut:
        sex_full = _SEX_ALIASES.get(sex)
        if sex_full is None:
            raise HTTPException(status_code=422, detail=f"sex must be one of {SEXES} (or F/M)")
        found = _peak_for(sex_full, feature)
        if found is None:
            raise HTTPException(
                status_code=404,
                detail=f"no cohort records for sex={sex_full!r}, feature={feature!r}",
            )
        curve, peak = found
        window = None
        if peak.next_median is not None:
            w = peak_stage_window(peak)
            window = [w.lower, w.upper]
        return GrowthCurveOut(
            sex=sex_full,
            feature=feature,
            ages=curve.ages,
            quantiles={str(q): v for q, v in curve.quantiles.items()},
            counts=curve.counts,
            annual_rates=[
                {"interval": list(interval), "rate": rate}
                for interval, rate in annual_growth_rate(curve)
            ],
            peak=GrowthPeakOut(**peak.to_dict()),
            stage_window=window,
        )

    return app


def build_default_app(config=None) -> FastAPI:
    """App factory for ``uvicorn keyrefine.service.app:build_default_app``.

    Loads the checkpoint and cohort named by the config (or defaults) and
    assembles the application.
    """
    from ..config import WorkbenchConfig, load_config
    from .runtime import assemble_service

    if config is None:
        config = load_config(None)
    assert isinstance(config, WorkbenchConfig)
    return assemble_service(config).app
