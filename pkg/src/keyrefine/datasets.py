"""Dataset files: JSONL annotations, manifests with splits, image loading.

One annotation record per line: ``{"image": path, "width": int, "height":
int, "keypoints": [[x, y] * K], "age"?: years, "sex"?: "F"|"M",
"patient_id"?: str}``.  Coordinates are floats in the row-major, y-down
pixel frame of the referenced image.  JSON float round-tripping is exact,
so written files reload bit-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .codec import ImageGrid
from .errors import ShapeError
from .model.training import TrainingSample

# Annotation files abbreviate sex; analytics use the full words.
SEX_LABELS = {"F": "female", "M": "male"}
SEX_CODES = {v: k for k, v in SEX_LABELS.items()}


@dataclass
class AnnotationRecord:
    """One image's annotation row."""

    image: str
    width: int
    height: int
    keypoints: np.ndarray
    age: float | None = None
    sex: str | None = None
    patient_id: str | None = None

    def __post_init__(self) -> None:
        self.keypoints = np.asarray(self.keypoints, dtype=np.float64)
        if self.keypoints.ndim != 2 or self.keypoints.shape[1] != 2:
            raise ShapeError(f"keypoints must be (K, 2), got {self.keypoints.shape}")
        if self.width < 1 or self.height < 1:
            raise ShapeError("width and height must be positive")
        if self.sex is not None and self.sex not in SEX_LABELS:
            raise ShapeError(f"sex must be one of {sorted(SEX_LABELS)}, got {self.sex!r}")

    def to_json(self) -> dict:
        row = {
            "image": self.image,
            "width": self.width,
            "height": self.height,
            "keypoints": [[float(x), float(y)] for x, y in self.keypoints],
        }
        if self.age is not None:
            row["age"] = self.age
        if self.sex is not None:
            row["sex"] = self.sex
        if self.patient_id is not None:
            row["patient_id"] = self.patient_id
        return row

    @classmethod
    def from_json(cls, row: dict) -> "AnnotationRecord":
        return cls(
            image=row["image"],
            width=int(row["width"]),
            height=int(row["height"]),
            keypoints=row["keypoints"],
            age=row.get("age"),
            sex=row.get("sex"),
            patient_id=row.get("patient_id"),
        )


def write_annotations(path: str | Path, records: list[AnnotationRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json()) + "\n")


def read_annotations(path: str | Path) -> list[AnnotationRecord]:
    path = Path(path)
    if not path.exists():
        raise ShapeError(f"annotation file not found: {path}")
    records = []
    with path.open() as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(AnnotationRecord.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, ShapeError) as exc:
                raise ShapeError(f"{path}:{line_no}: malformed annotation row: {exc}") from exc
    return records


@dataclass
class DatasetManifest:
    """Names, schema, and split membership for one dataset."""

    name: str
    num_keypoints: int
    keypoint_names: tuple[str, ...]
    image_size: tuple[int, int]  # (W, H) working resolution
    annotations: str = "annotations.jsonl"
    splits: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.keypoint_names = tuple(self.keypoint_names)
        if len(self.keypoint_names) != self.num_keypoints:
            raise ShapeError(
                f"manifest lists {len(self.keypoint_names)} names"
                f" for {self.num_keypoints} keypoints"
            )
        seen: dict[str, str] = {}
        for split, members in self.splits.items():
            for image in members:
                if image in seen:
                    raise ShapeError(
                        f"image {image!r} appears in splits {seen[image]!r} and {split!r}"
                    )
                seen[image] = split

    def split_of(self, image: str) -> str | None:
        for split, members in self.splits.items():
            if image in members:
                return split
        return None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "num_keypoints": self.num_keypoints,
            "keypoint_names": list(self.keypoint_names),
            "image_size": list(self.image_size),
            "annotations": self.annotations,
            "splits": self.splits,
        }

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        path = Path(path)
        if not path.exists():
            raise ShapeError(f"manifest not found: {path}")
        data = json.loads(path.read_text())
        return cls(
            name=data["name"],
            num_keypoints=int(data["num_keypoints"]),
            keypoint_names=tuple(data["keypoint_names"]),
            image_size=tuple(data["image_size"]),
            annotations=data.get("annotations", "annotations.jsonl"),
            splits={k: list(v) for k, v in data.get("splits", {}).items()},
        )


def load_image(path: str | Path, size: tuple[int, int] | None = None) -> ImageGrid:
    """Load a grayscale image as a (1, H, W) grid in [0, 1]."""
    path = Path(path)
    if not path.exists():
        raise ShapeError(f"image not found: {path}")
    with Image.open(path) as img:
        img = img.convert("L")
        if size is not None and img.size != tuple(size):
            img = img.resize(tuple(size), Image.BILINEAR)
        pixels = np.asarray(img, dtype=np.float32) / 255.0
    return ImageGrid(pixels[None])


def save_image(path: str | Path, pixels: np.ndarray) -> None:
    """Write a (H, W) or (1, H, W) float [0, 1] array as 8-bit grayscale."""
    arr = np.asarray(pixels)
    if arr.ndim == 3:
        arr = arr[0]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray((np.clip(arr, 0.0, 1.0) * 255.0).round().astype(np.uint8)).save(path)


def load_samples(
    root: str | Path,
    manifest: DatasetManifest,
    split: str | None = None,
) -> list[TrainingSample]:
    """Materialize (image, keypoints) samples for one split (or all).

    Images are rescaled to the manifest's working resolution, with
    keypoint coordinates scaled to match.
    """
    root = Path(root)
    records = read_annotations(root / manifest.annotations)
    width, height = manifest.image_size
    samples = []
    for record in records:
        if split is not None and manifest.split_of(record.image) != split:
            continue
        if record.keypoints.shape[0] != manifest.num_keypoints:
            raise ShapeError(
                f"{record.image}: {record.keypoints.shape[0]} keypoints,"
                f" manifest says {manifest.num_keypoints}"
            )
        grid = load_image(root / record.image, size=(width, height))
        scale = np.array([width / record.width, height / record.height])
        samples.append(TrainingSample(grid.pixels, record.keypoints * scale))
    if not samples:
        raise ShapeError(f"no samples for split {split!r} under {root}")
    return samples


def export_synthetic(
    dataset,
    root: str | Path,
    name: str,
    train_fraction: float = 0.8,
    val_fraction: float = 0.1,
) -> DatasetManifest:
    """Write a generated dataset as PNGs + annotations + manifest."""
    from .synthetic import SyntheticDataset

    assert isinstance(dataset, SyntheticDataset)
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    records = []
    image_names = []
    for i, sample in enumerate(dataset.samples):
        rel = f"images/{name}-{i:04d}.png"
        save_image(root / rel, sample.image)
        meta = dataset.meta[i] if i < len(dataset.meta) else {}
        age = meta.get("age")
        sex = SEX_CODES.get(meta.get("sex", ""), None)
        height, width = sample.image.shape[1:]
        records.append(
            AnnotationRecord(
                image=rel,
                width=width,
                height=height,
                keypoints=sample.points,
                age=age,
                sex=sex,
                patient_id=meta.get("subject_id"),
            )
        )
        image_names.append(rel)

    n = len(image_names)
    n_train = max(1, round(n * train_fraction))
    n_val = max(1, round(n * val_fraction)) if n - n_train >= 2 else max(0, n - n_train - 1)
    splits = {
        "train": image_names[:n_train],
        "val": image_names[n_train : n_train + n_val],
        "test": image_names[n_train + n_val :],
    }
    splits = {k: v for k, v in splits.items() if v}

    manifest = DatasetManifest(
        name=name,
        num_keypoints=dataset.samples[0].points.shape[0],
        keypoint_names=dataset.keypoint_names,
        image_size=dataset.image_size,
        annotations="annotations.jsonl",
        splits=splits,
    )
    write_annotations(root / "annotations.jsonl", records)
    manifest.save(root / "manifest.json")
    return manifest
