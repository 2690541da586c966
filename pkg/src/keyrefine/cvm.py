"""Cervical vertebral morphometrics from 13 annotated keypoints.

Keypoints cover the second to fourth cervical vertebrae (C2 has only its
lower border annotated; C3 and C4 get upper corners too).  All ratios are
scale-free: concavity of the lower border, body length relative to base
width, and corner heights relative to base width.  Coordinates follow
image convention -- x grows rightward, y grows DOWNWARD, so "superior"
means smaller y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, ShapeError

# Flat keypoint order used everywhere (annotations, model channels, API).
CERVICAL_KEYPOINT_NAMES: tuple[str, ...] = (
    "C2_LP",
    "C2_LM",
    "C2_LA",
    "C3_UP",
    "C3_UA",
    "C3_LP",
    "C3_LM",
    "C3_LA",
    "C4_UP",
    "C4_UA",
    "C4_LP",
    "C4_LM",
    "C4_LA",
)
NUM_CERVICAL_KEYPOINTS = len(CERVICAL_KEYPOINT_NAMES)

CVM_FEATURE_NAMES: tuple[str, ...] = (
    "concavity_c2",
    "concavity_c3",
    "concavity_c4",
    "length_width_c3",
    "length_width_c4",
    "height_width_c3",
    "height_width_c4",
)

# Clinically acceptable error in the C3 length/width ratio; dividing by the
# measured ratio-per-pixel sensitivity converts it to a pixel tolerance.
RATIO_TOLERANCE = 0.025

_EPS_WIDTH = 1e-12

# Indices of the five C3 keypoints in the flat order.
C3_SLICE = slice(3, 8)
C4_SLICE = slice(8, 13)


@dataclass
class CervicalKeypoints:
    """Named access to the 13 cervical keypoints, stored as a (13, 2) array."""

    points: np.ndarray

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.shape != (NUM_CERVICAL_KEYPOINTS, 2):
            raise ShapeError(
                f"expected ({NUM_CERVICAL_KEYPOINTS}, 2) cervical keypoints,"
                f" got {self.points.shape}"
            )
        if not np.all(np.isfinite(self.points)):
            raise ShapeError("cervical keypoints must be finite")

    def named(self, name: str) -> np.ndarray:
        return self.points[CERVICAL_KEYPOINT_NAMES.index(name)]

    @property
    def c2(self) -> np.ndarray:
        """(3, 2): LP, LM, LA."""
        return self.points[0:3]

    @property
    def c3(self) -> np.ndarray:
        """(5, 2): UP, UA, LP, LM, LA."""
        return self.points[C3_SLICE]

    @property
    def c4(self) -> np.ndarray:
        """(5, 2): UP, UA, LP, LM, LA."""
        return self.points[C4_SLICE]


def _base(lp: np.ndarray, la: np.ndarray) -> tuple[np.ndarray, float]:
    """Unit direction LP->LA and base width; rejects coincident corners."""
    d = np.asarray(la, dtype=np.float64) - np.asarray(lp, dtype=np.float64)
    width = float(np.linalg.norm(d))
    if width < _EPS_WIDTH:
        raise DegenerateGeometryError("lower-border corners coincide; width is zero")
    return d / width, width


def _perpendicular_offset(point, lp, direction) -> np.ndarray:
    rel = np.asarray(point, dtype=np.float64) - np.asarray(lp, dtype=np.float64)
    return rel - np.dot(rel, direction) * direction


def concavity_width_ratio(lp, lm, la) -> float:
    """Depth of the lower-border concavity relative to the base width.

    The depth is the perpendicular distance of LM from the LP-LA chord,
    counted only when LM sits superior to the chord (offset pointing
    toward smaller y); inferior bulges clamp to 0.
    """
    direction, width = _base(lp, la)
    offset = _perpendicular_offset(lm, lp, direction)
    depth = float(np.linalg.norm(offset))
    if offset[1] >= 0.0:
        return 0.0
    return depth / width


def length_width_ratio(up, ua, lp, la) -> float:
    """Mean of the posterior and anterior edge lengths over the base width."""
    _, width = _base(lp, la)
    posterior = float(np.linalg.norm(np.asarray(up, float) - np.asarray(lp, float)))
    anterior = float(np.linalg.norm(np.asarray(ua, float) - np.asarray(la, float)))
    return (posterior + anterior) / (2.0 * width)


def height_width_ratio(up, ua, lp, la) -> float:
    """Mean perpendicular height of the upper corners over the base width."""
    direction, width = _base(lp, la)
    h_post = float(np.linalg.norm(_perpendicular_offset(up, lp, direction)))
    h_ant = float(np.linalg.norm(_perpendicular_offset(ua, lp, direction)))
    return (h_post + h_ant) / (2.0 * width)


def cvm_feature_vector(keypoints: CervicalKeypoints | np.ndarray) -> np.ndarray:
    """The 7 morphometric features in :data:`CVM_FEATURE_NAMES` order."""
    if not isinstance(keypoints, CervicalKeypoints):
        keypoints = CervicalKeypoints(keypoints)
    c2_lp, c2_lm, c2_la = keypoints.c2
    c3_up, c3_ua, c3_lp, c3_lm, c3_la = keypoints.c3
    c4_up, c4_ua, c4_lp, c4_lm, c4_la = keypoints.c4
    return np.array(
        [
            concavity_width_ratio(c2_lp, c2_lm, c2_la),
            concavity_width_ratio(c3_lp, c3_lm, c3_la),
            concavity_width_ratio(c4_lp, c4_lm, c4_la),
            length_width_ratio(c3_up, c3_ua, c3_lp, c3_la),
            length_width_ratio(c4_up, c4_ua, c4_lp, c4_la),
            height_width_ratio(c3_up, c3_ua, c3_lp, c3_la),
            height_width_ratio(c4_up, c4_ua, c4_lp, c4_la),
        ]
    )


def cvm_features(keypoints: CervicalKeypoints | np.ndarray) -> dict[str, float]:
    """Feature vector as a name -> value mapping."""
    vec = cvm_feature_vector(keypoints)
    return {name: float(v) for name, v in zip(CVM_FEATURE_NAMES, vec)}


def _c3_length_width(points: np.ndarray) -> float:
    up, ua, lp, _, la = points[C3_SLICE]
    return length_width_ratio(up, ua, lp, la)


def sensitivity_analysis(keypoints: CervicalKeypoints | np.ndarray, delta: float = 1.0) -> float:
    """Mean |change| of the C3 length/width ratio per ``delta``-pixel shift.

    Each of the five C3 keypoints is displaced by ``delta`` in all four
    axis directions (20 perturbations); the result is the mean absolute
    ratio change.  LM does not enter the ratio, so its four perturbations
    contribute zeros to the mean by construction.
    """
    if not isinstance(keypoints, CervicalKeypoints):
        keypoints = CervicalKeypoints(keypoints)
    if delta <= 0:
        raise ValueError("delta must be positive")
    base = _c3_length_width(keypoints.points)
    shifts = np.array([(delta, 0.0), (-delta, 0.0), (0.0, delta), (0.0, -delta)])
    changes = []
    for idx in range(C3_SLICE.start, C3_SLICE.stop):
        for shift in shifts:
            perturbed = keypoints.points.copy()
            perturbed[idx] += shift
            changes.append(abs(_c3_length_width(perturbed) - base))
    return float(np.mean(changes))


def error_tolerance_px(sensitivity: float, ratio_tolerance: float = RATIO_TOLERANCE) -> float:
    """Largest keypoint error (pixels) that keeps the C3 length/width ratio
    within ``ratio_tolerance``."""
    if sensitivity <= 0:
        raise ValueError("sensitivity must be positive")
    return ratio_tolerance / sensitivity
