"""Synthetic data: a renderable spine benchmark, parametric cervical
shapes with known morphometrics, and cohort resampling around bundled
normative medians.

The spine benchmark draws stacked vertebra-like bodies whose corner
keypoints have strongly correlated geometry (near-constant widths and
corner angles), so morphology-aware losses have real structure to
exploit.  A configurable fraction of bodies render at near-background
contrast, making their corners hard to locate without user hints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .cvm import CERVICAL_KEYPOINT_NAMES
from .errors import ShapeError
from .growth import REFERENCE_GROWTH_MEDIANS, CohortRecord
from .model.training import TrainingSample


@dataclass
class SyntheticDataset:
    """Samples plus the naming/shape metadata tests and tools need."""

    samples: list[TrainingSample]
    keypoint_names: tuple[str, ...]
    image_size: tuple[int, int]
    meta: list[dict] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)

    def split(self, train_fraction: float = 0.8) -> tuple[list[TrainingSample], list[TrainingSample]]:
        """Deterministic prefix/suffix split (generation order is already random)."""
        if not 0.0 < train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        cut = max(1, min(len(self.samples) - 1, round(len(self.samples) * train_fraction)))
        return self.samples[:cut], self.samples[cut:]


def _rotation(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[c, -s], [s, c]])


def _render_rect(
    canvas: np.ndarray,
    center: np.ndarray,
    half_w: float,
    half_h: float,
    angle_rad: float,
    brightness: float,
    edge_px: float = 1.5,
) -> None:
    """Paint an oriented rectangle with a soft antialiased edge (max-composited)."""
    h, w = canvas.shape
    ys, xs = np.mgrid[0:h, 0:w]
    rel_x = xs - center[0]
    rel_y = ys - center[1]
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    # Rotate into the rectangle frame.
    u = c * rel_x + s * rel_y
    v = -s * rel_x + c * rel_y
    d_out = np.maximum(np.abs(u) - half_w, np.abs(v) - half_h)
    alpha = np.clip(0.5 - d_out / edge_px, 0.0, 1.0)
    np.maximum(canvas, alpha * brightness, out=canvas)


@dataclass
class SpineBenchmarkConfig:
    """Knobs for the stacked-vertebra benchmark."""

    num_images: int = 200
    image_size: tuple[int, int] = (256, 512)  # (W, H)
    num_bodies: int = 4
    seed: int = 0
    low_contrast_prob: float = 0.3
    noise_sigma: float = 0.03
    blur_sigma: float = 1.0

    @property
    def num_keypoints(self) -> int:
        return 2 * self.num_bodies


def generate_spine_benchmark(config: SpineBenchmarkConfig) -> SyntheticDataset:
    """Render ``num_images`` spine images with lower-corner keypoints.

    Keypoints run top body to bottom body, posterior (left) corner before
    anterior (right) corner.
    """
    rng = np.random.default_rng(config.seed)
    width, height = config.image_size
    samples: list[TrainingSample] = []
    meta: list[dict] = []

    for _ in range(config.num_images):
        # Subject-level latent geometry; per-body jitter stays small so the
        # population dispersion of widths/heights is low.
        base_width = rng.normal(0.29 * width, 0.016 * width)
        hw_ratio = rng.normal(0.72, 0.02)
        tilt = math.radians(rng.normal(0.0, 3.0))
        col_x = rng.normal(0.5 * width, 0.04 * width)
        top_y = rng.normal(0.17 * height, 0.025 * height)
        gap = rng.normal(0.05 * height, 0.006 * height)
        curve = rng.normal(0.0, 0.01 * width)
        dim_body = (
            int(rng.integers(config.num_bodies))
            if rng.random() < config.low_contrast_prob
            else -1
        )

        canvas = np.zeros((height, width), dtype=np.float64)
        points = np.zeros((config.num_keypoints, 2))
        y_cursor = top_y
        for body in range(config.num_bodies):
            w_body = base_width * rng.normal(1.0, 0.012)
            h_body = w_body * (hw_ratio + rng.normal(0.0, 0.008))
            cx = col_x + curve * (body - (config.num_bodies - 1) / 2.0) ** 2
            center = np.array([cx, y_cursor + h_body / 2.0])
            brightness = (
                rng.uniform(0.16, 0.22) if body == dim_body else rng.uniform(0.5, 0.62)
            )
            _render_rect(canvas, center, w_body / 2.0, h_body / 2.0, tilt, brightness)

            rot = _rotation(tilt)
            lower_post = center + rot @ np.array([-w_body / 2.0, h_body / 2.0])
            lower_ant = center + rot @ np.array([w_body / 2.0, h_body / 2.0])
            points[2 * body] = lower_post
            points[2 * body + 1] = lower_ant
            y_cursor += h_body + gap

        background = 0.12 + 0.02 * (np.linspace(0, 1, height)[:, None])
        image = np.maximum(canvas, background)
        if config.blur_sigma > 0:
            image = gaussian_filter(image, config.blur_sigma)
        image = image + rng.normal(0.0, config.noise_sigma, image.shape)
        image = np.clip(image, 0.0, 1.0).astype(np.float32)[None]

        samples.append(TrainingSample(image, points))
        meta.append({"low_contrast_body": dim_body})

    names = tuple(
        f"V{body + 1}_{side}" for body in range(config.num_bodies) for side in ("LP", "LA")
    )
    return SyntheticDataset(samples, names, config.image_size, meta)


def cervical_shape(
    length_width: tuple[float, float] = (0.7, 0.7),
    concavity: tuple[float, float, float] = (0.08, 0.06, 0.06),
    width: float = 60.0,
    origin: tuple[float, float] = (80.0, 140.0),
    gap_ratio: float = 0.45,
    tilt_deg: float = 0.0,
) -> np.ndarray:
    """13 cervical keypoints with exactly known morphometric ratios.

    Built axis-aligned -- so the length/width and height/width ratios of
    C3/C4 both equal the requested ``length_width`` values and the
    concavity ratios equal ``concavity`` -- then optionally rotated about
    the centroid.  The ratios survive the rotation (they are rigid
    invariants for tilts below the superior-direction flip).
    """
    lw3, lw4 = length_width
    c2, c3, c4 = concavity
    if min(lw3, lw4) <= 0 or width <= 0:
        raise ShapeError("length/width ratios and width must be positive")
    x0, y0 = origin
    gap = gap_ratio * width
    h3, h4 = lw3 * width, lw4 * width

    c2_y = y0 - gap
    c3_top, c3_bot = y0, y0 + h3
    c4_top = c3_bot + gap
    c4_bot = c4_top + h4

    pts = np.array(
        [
            [x0, c2_y],                      # C2_LP
            [x0 + width / 2, c2_y - c2 * width],  # C2_LM
            [x0 + width, c2_y],              # C2_LA
            [x0, c3_top],                    # C3_UP
            [x0 + width, c3_top],            # C3_UA
            [x0, c3_bot],                    # C3_LP
            [x0 + width / 2, c3_bot - c3 * width],  # C3_LM
            [x0 + width, c3_bot],            # C3_LA
            [x0, c4_top],                    # C4_UP
            [x0 + width, c4_top],            # C4_UA
            [x0, c4_bot],                    # C4_LP
            [x0 + width / 2, c4_bot - c4 * width],  # C4_LM
            [x0 + width, c4_bot],            # C4_LA
        ]
    )
    if tilt_deg:
        centroid = pts.mean(axis=0)
        pts = (pts - centroid) @ _rotation(math.radians(tilt_deg)).T + centroid
    return pts


def expected_cervical_features(
    length_width: tuple[float, float] = (0.7, 0.7),
    concavity: tuple[float, float, float] = (0.08, 0.06, 0.06),
) -> dict[str, float]:
    """The feature values :func:`cervical_shape` is constructed to have."""
    lw3, lw4 = length_width
    c2, c3, c4 = concavity
    return {
        "concavity_c2": c2,
        "concavity_c3": c3,
        "concavity_c4": c4,
        "length_width_c3": lw3,
        "length_width_c4": lw4,
        "height_width_c3": lw3,
        "height_width_c4": lw4,
    }


def _growth_length_width(age: float, sex: str, rng: np.random.Generator) -> tuple[float, float]:
    """Smooth age trend through the normative medians, with subject noise."""
    mid = 10.0 if sex == "female" else 13.0
    lw3 = 0.55 + 0.35 / (1.0 + math.exp(-(age - mid) / 1.2))
    lw4 = lw3 + rng.normal(0.0, 0.01)
    return lw3 + rng.normal(0.0, 0.02), max(0.2, lw4)


@dataclass
class CervicalDatasetConfig:
    """Knobs for the rendered cervical dataset (13 keypoints + demographics)."""

    num_images: int = 60
    image_size: tuple[int, int] = (256, 512)
    seed: int = 0
    age_range: tuple[float, float] = (6.0, 18.0)
    noise_sigma: float = 0.03
    blur_sigma: float = 1.0


def generate_cervical_dataset(config: CervicalDatasetConfig) -> SyntheticDataset:
    """Rendered cervical images whose annotations drive the full pipeline.

    Each sample's metadata records age, sex, and the exact feature values
    its keypoints encode.
    """
    rng = np.random.default_rng(config.seed)
    width, height = config.image_size
    samples: list[TrainingSample] = []
    meta: list[dict] = []

    for index in range(config.num_images):
        age = float(rng.uniform(*config.age_range))
        sex = "female" if rng.random() < 0.5 else "male"
        lw3, lw4 = _growth_length_width(age, sex, rng)
        maturity = np.clip((age - 6.0) / 12.0, 0.0, 1.0)
        conc = tuple(
            float(max(0.0, rng.normal(0.02 + 0.08 * maturity, 0.01))) for _ in range(3)
        )
        body_width = rng.normal(0.26 * width, 0.012 * width)
        origin = (
            rng.normal(0.37 * width, 0.03 * width),
            rng.normal(0.42 * height, 0.03 * height),
        )
        tilt = float(rng.normal(0.0, 4.0))
        pts = cervical_shape(
            length_width=(lw3, lw4),
            concavity=conc,  # type: ignore[arg-type]
            width=body_width,
            origin=origin,
            gap_ratio=rng.uniform(0.4, 0.5),
            tilt_deg=tilt,
        )

        canvas = np.zeros((height, width), dtype=np.float64)
        tilt_rad = math.radians(tilt)
        # C2 body sits above its annotated lower border.
        for top_idx, bot_l, bot_r in ((None, 0, 2), (3, 5, 7), (8, 10, 12)):
            left, right = pts[bot_l], pts[bot_r]
            w_body = float(np.linalg.norm(right - left))
            if top_idx is None:
                h_body = 0.8 * w_body
            else:
                h_body = float(np.linalg.norm(pts[top_idx] - left))
            edge = (right - left) / w_body
            up = np.array([edge[1], -edge[0]])  # superior normal
            center = (left + right) / 2.0 + up * h_body / 2.0
            _render_rect(
                canvas, center, w_body / 2.0, h_body / 2.0, tilt_rad, rng.uniform(0.5, 0.62)
            )

        background = 0.12 + 0.02 * (np.linspace(0, 1, height)[:, None])
        image = np.maximum(canvas, background)
        if config.blur_sigma > 0:
            image = gaussian_filter(image, config.blur_sigma)
        image = image + rng.normal(0.0, config.noise_sigma, image.shape)
        image = np.clip(image, 0.0, 1.0).astype(np.float32)[None]

        samples.append(TrainingSample(image, pts))
        meta.append(
            {
                "subject_id": f"synthetic-{index:04d}",
                "age": age,
                "sex": sex,
                "features": expected_cervical_features((lw3, lw4), conc),  # type: ignore[arg-type]
            }
        )
    return SyntheticDataset(samples, CERVICAL_KEYPOINT_NAMES, config.image_size, meta)


def resample_reference_cohort(
    sex: str,
    features: tuple[str, ...] = ("length_width_c3", "length_width_c4"),
    count_per_age: int = 21,
    sigma: float = 0.005,
    seed: int = 0,
) -> list[CohortRecord]:
    """Cohort records scattered around the bundled normative medians.

    Each age bucket is built symmetrically around its reference median --
    one record exactly at the median plus +/- pairs -- so the bucket
    median is preserved exactly, not just in expectation.  Downstream
    rate comparisons therefore reproduce the normative table's ties and
    orderings regardless of the seed.
    """
    rng = np.random.default_rng(seed)
    count = count_per_age if count_per_age % 2 == 1 else count_per_age + 1
    ages = None
    for feature in features:
        key = (sex, feature)
        if key not in REFERENCE_GROWTH_MEDIANS:
            raise ShapeError(f"no reference medians for sex={sex!r}, feature={feature!r}")
        feature_ages = sorted(REFERENCE_GROWTH_MEDIANS[key])
        if ages is None:
            ages = feature_ages
        elif feature_ages != ages:
            raise ShapeError("reference features must share age buckets")
    assert ages is not None

    records: list[CohortRecord] = []
    for age in ages:
        offsets_by_feature = {}
        for feature in features:
            half = sigma * np.abs(rng.standard_normal((count - 1) // 2))
            offsets_by_feature[feature] = np.concatenate([[0.0], half, -half])
        fractions = rng.uniform(0.0, 1.0, count)
        for j in range(count):
            values = {
                feature: REFERENCE_GROWTH_MEDIANS[(sex, feature)][age]
                + float(offsets_by_feature[feature][j])
                for feature in features
            }
            records.append(
                CohortRecord(
                    age=age + float(fractions[j]),
                    sex=sex,
                    values=values,
                    subject_id=f"{sex}-{age}-{j:03d}",
                )
            )
    return records
