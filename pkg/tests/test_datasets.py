"""Annotation JSONL IO, manifests with split bookkeeping, image loading,
synthetic export round-trip."""

import json

import numpy as np
import pytest

from keyrefine.datasets import (
    AnnotationRecord,
    DatasetManifest,
    export_synthetic,
    load_image,
    load_samples,
    read_annotations,
    save_image,
    write_annotations,
)
from keyrefine.errors import ShapeError
from keyrefine.synthetic import SpineBenchmarkConfig, generate_spine_benchmark


class TestAnnotationRecords:
    def test_json_round_trip_preserves_floats(self):
        rng = np.random.default_rng(0)
        kps = rng.uniform(0, 512, size=(13, 2))
        rec = AnnotationRecord("a.png", 512, 512, kps, age=11.3, sex="F", patient_id="p1")
        back = AnnotationRecord.from_json(json.loads(json.dumps(rec.to_json())))
        # float repr round-trips bit-exactly through JSON
        assert np.array_equal(back.keypoints, kps)
        assert back.age == 11.3 and back.sex == "F" and back.patient_id == "p1"

    def test_optional_fields_omitted(self):
        rec = AnnotationRecord("a.png", 64, 64, np.zeros((2, 2)))
        row = rec.to_json()
        assert "age" not in row and "sex" not in row and "patient_id" not in row

    def test_validation(self):
        with pytest.raises(ShapeError):
            AnnotationRecord("a.png", 64, 64, np.zeros((2, 3)))
        with pytest.raises(ShapeError):
            AnnotationRecord("a.png", 0, 64, np.zeros((2, 2)))
        with pytest.raises(ShapeError):
            AnnotationRecord("a.png", 64, 64, np.zeros((2, 2)), sex="X")

    def test_file_round_trip(self, tmp_path):
        records = [
            AnnotationRecord(f"img{i}.png", 128, 256, np.random.default_rng(i).uniform(0, 128, (4, 2)))
            for i in range(3)
        ]
        path = tmp_path / "ann.jsonl"
        write_annotations(path, records)
        loaded = read_annotations(path)
        assert len(loaded) == 3
        for a, b in zip(records, loaded):
            assert np.array_equal(a.keypoints, b.keypoints)
            assert a.image == b.image

    def test_malformed_line_position(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        path.write_text(
            '{"image": "a.png", "width": 8, "height": 8, "keypoints": [[1.0, 2.0]]}\n{nope\n'
        )
        with pytest.raises(ShapeError) as exc:
            read_annotations(path)
        assert ":2:" in str(exc.value)

    def test_bad_keypoint_shape_reports_line(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        path.write_text('{"image": "a.png", "width": 8, "height": 8, "keypoints": [[1.0]]}\n')
        with pytest.raises(ShapeError) as exc:
            read_annotations(path)
        assert ":1:" in str(exc.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ShapeError):
            read_annotations(tmp_path / "absent.jsonl")


class TestManifest:
    def test_split_disjointness_enforced(self):
        with pytest.raises(ShapeError):
            DatasetManifest(
                name="d", num_keypoints=2, keypoint_names=("a", "b"), image_size=(64, 64),
                splits={"train": ["x.png"], "val": ["x.png"]},
            )

    def test_split_lookup(self):
        m = DatasetManifest(
            name="d", num_keypoints=2, keypoint_names=("a", "b"), image_size=(64, 64),
            splits={"train": ["x.png"], "val": ["y.png"]},
        )
        assert m.split_of("x.png") == "train"
        assert m.split_of("z.png") is None

    def test_names_must_match_count(self):
        with pytest.raises(ShapeError):
            DatasetManifest(name="d", num_keypoints=3, keypoint_names=("a",), image_size=(8, 8))

    def test_save_load(self, tmp_path):
        m = DatasetManifest(
            name="d", num_keypoints=1, keypoint_names=("a",), image_size=(32, 16),
            splits={"train": ["i.png"]},
        )
        m.save(tmp_path / "manifest.json")
        loaded = DatasetManifest.load(tmp_path / "manifest.json")
        assert loaded == m


class TestImages:
    def test_save_load_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        pixels = rng.uniform(0, 1, size=(16, 24)).astype(np.float32)
        path = tmp_path / "img.png"
        save_image(path, pixels)
        grid = load_image(path)
        assert grid.pixels.shape == (1, 16, 24)
        # 8-bit quantization: half a level of tolerance
        assert np.abs(grid.pixels[0] - pixels).max() <= 0.5 / 255 + 1e-6

    def test_resize_on_load(self, tmp_path):
        path = tmp_path / "img.png"
        save_image(path, np.zeros((16, 24)))
        grid = load_image(path, size=(12, 8))  # (W, H)
        assert grid.pixels.shape == (1, 8, 12)

    def test_missing_image(self, tmp_path):
        with pytest.raises(ShapeError):
            load_image(tmp_path / "none.png")


@pytest.fixture(scope="module")
def exported(tmp_path_factory):
    root = tmp_path_factory.mktemp("ds")
    dataset = generate_spine_benchmark(
        SpineBenchmarkConfig(num_images=10, image_size=(64, 128), num_bodies=2, seed=0)
    )
    manifest = export_synthetic(dataset, root, "mini", train_fraction=0.6, val_fraction=0.2)
    return root, dataset, manifest


class TestExport:
    def test_layout_and_split_sizes(self, exported):
        root, dataset, manifest = exported
        assert (root / "annotations.jsonl").exists()
        assert (root / "manifest.json").exists()
        assert len(list((root / "images").glob("*.png"))) == 10
        assert len(manifest.splits["train"]) == 6
        assert len(manifest.splits["val"]) == 2
        assert len(manifest.splits["test"]) == 2

    def test_load_samples_round_trip(self, exported):
        root, dataset, manifest = exported
        samples = load_samples(root, manifest, split="train")
        assert len(samples) == 6
        assert samples[0].image.shape == (1, 128, 64)
        assert samples[0].points.shape == (4, 2)
        # working size == stored size: keypoints come back bit-exact
        assert np.array_equal(samples[0].points, dataset.samples[0].points)

    def test_keypoints_rescale_with_working_size(self, exported):
        root, _, manifest = exported
        halved = DatasetManifest(
            name=manifest.name,
            num_keypoints=manifest.num_keypoints,
            keypoint_names=manifest.keypoint_names,
            image_size=(32, 64),
            splits=manifest.splits,
        )
        small = load_samples(root, halved, split="train")
        full = load_samples(root, manifest, split="train")
        assert small[0].image.shape == (1, 64, 32)
        assert np.allclose(small[0].points, full[0].points * 0.5)

    def test_unknown_split_rejected(self, exported):
        root, _, manifest = exported
        with pytest.raises(ShapeError):
            load_samples(root, manifest, split="holdout")
