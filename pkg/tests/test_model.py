"""Network construction, gating/attention behavior, decode equivalence,
training mechanics and checkpointing."""

import numpy as np
import pytest
import torch

from keyrefine.codec import (
    GaussianParams,
    HeatmapStack,
    KeypointSet,
    decode_local_soft_argmax,
    encode_heatmaps,
)
from keyrefine.errors import ShapeError, WorkbenchError
from keyrefine.model import (
    CrossAttentionRecalibration,
    GatingRecalibration,
    InteractiveKeypointNet,
    ModelConfig,
    Trainer,
    TrainingDiverged,
    TrainingSample,
    build_model,
    load_checkpoint,
    parameter_count,
    predict,
    save_checkpoint,
    soft_argmax_coords,
)
from keyrefine.model.network import sincos_position_encoding
from keyrefine.morphology import LossWeights, MorphologySubsets, SubsetCriterion, select_subsets
from tests.conftest import random_keypoint_dataset


def _inputs(config, batch=2, h=32, w=32, seed=0):
    g = torch.Generator().manual_seed(seed)
    image = torch.rand(batch, config.image_channels, h, w, generator=g)
    prev = torch.rand(batch, config.num_keypoints, h, w, generator=g)
    hints = torch.rand(batch, config.num_keypoints, h, w, generator=g)
    return image, prev, hints


class TestConfig:
    def test_defaults_are_v2(self):
        cfg = ModelConfig()
        assert cfg.variant == "v2"
        assert cfg.pooling == "max"
        assert cfg.gate_activation == "sigmoid"
        assert cfg.hint_downsample == 8

    def test_rejects_invalid_values(self):
        with pytest.raises(ValueError):
            ModelConfig(variant="v3")
        with pytest.raises(ValueError):
            ModelConfig(hint_downsample=3)
        with pytest.raises(ValueError):
            ModelConfig(attention_dim=30, attention_heads=4)  # not divisible
        with pytest.raises(ValueError):
            ModelConfig(num_keypoints=0)

    def test_dict_round_trip(self):
        cfg = ModelConfig(num_keypoints=7, variant="v1", backbone_width=12)
        assert ModelConfig.from_dict(cfg.to_dict()) == cfg
        with pytest.raises(ValueError):
            ModelConfig.from_dict({**cfg.to_dict(), "bogus_key": 1})


class TestNetwork:
    def test_output_shape_matches_input(self, tiny_config, tiny_model):
        image, prev, hints = _inputs(tiny_config)
        out = tiny_model(image, prev, hints)
        assert out.shape == (2, tiny_config.num_keypoints, 32, 32)

    def test_build_is_deterministic_per_seed(self, tiny_config):
        a = build_model(tiny_config).state_dict()
        b = build_model(tiny_config).state_dict()
        assert all(torch.equal(a[k], b[k]) for k in a)
        c = build_model(ModelConfig(**{**tiny_config.to_dict(), "seed": 1})).state_dict()
        assert any(not torch.equal(a[k], c[k]) for k in a)

    def test_batch_independence(self, tiny_config, tiny_model):
        # Per-sample outputs must not depend on batch composition (GroupNorm,
        # no cross-sample pooling).
        image, prev, hints = _inputs(tiny_config, batch=3)
        tiny_model.eval()
        with torch.no_grad():
            full = tiny_model(image, prev, hints)
            solo = tiny_model(image[1:2], prev[1:2], hints[1:2])
        assert torch.allclose(full[1], solo[0], atol=1e-6)

    def test_input_validation(self, tiny_config, tiny_model):
        image, prev, hints = _inputs(tiny_config)
        with pytest.raises(ShapeError):
            tiny_model(image[0], prev, hints)  # 3D image
        with pytest.raises(ShapeError):
            tiny_model(image, prev[:, :2], hints)  # missing channels
        with pytest.raises(ShapeError):
            tiny_model(image[..., :30], prev[..., :30], hints[..., :30])  # 30 % 8 != 0

    def test_hints_change_prediction(self, tiny_config, tiny_model):
        image, prev, hints = _inputs(tiny_config)
        tiny_model.eval()
        with torch.no_grad():
            base = tiny_model(image, prev, torch.zeros_like(hints))
            hinted = tiny_model(image, prev, hints)
        assert not torch.allclose(base, hinted)

    def test_v1_variant_builds_and_runs(self):
        cfg = ModelConfig(
            num_keypoints=4, variant="v1", backbone_width=8, recalib_channels=8,
            hint_channels=8, hint_downsample=4, head_width=8,
        )
        model = build_model(cfg)
        assert isinstance(model.recalibration, GatingRecalibration)
        image, prev, hints = _inputs(cfg)
        assert model(image, prev, hints).shape == (2, 4, 32, 32)


class TestGating:
    def test_zeroed_fc_gives_half_gates(self):
        gate = GatingRecalibration(8, 6, pooling="max", activation="sigmoid")
        last = gate.fc[-1]
        torch.nn.init.zeros_(last.weight)
        torch.nn.init.zeros_(last.bias)
        feats = torch.rand(3, 8, 4, 4)
        g = gate.gates(feats)
        assert torch.all(g == 0.5)
        main = torch.rand(3, 6, 4, 4)
        assert torch.allclose(gate(main, feats), 0.5 * main)

    def test_softmax_gates_sum_to_one(self):
        gate = GatingRecalibration(8, 6, activation="softmax")
        g = gate.gates(torch.rand(4, 8, 4, 4))
        assert torch.allclose(g.sum(dim=1), torch.ones(4), atol=1e-6)

    def test_average_pooling_uses_mean(self):
        gate = GatingRecalibration(4, 4, pooling="average")
        feats = torch.zeros(1, 4, 2, 2)
        feats[0, 0, 0, 0] = 4.0  # mean 1.0, max 4.0
        pooled_mean = gate.gates(feats)
        gate_max = GatingRecalibration(4, 4, pooling="max")
        gate_max.fc = gate.fc  # same weights, different pooling
        assert not torch.allclose(pooled_mean, gate_max.gates(feats))

    def test_invalid_options_rejected(self):
        with pytest.raises(ValueError):
            GatingRecalibration(8, 6, pooling="median")
        with pytest.raises(ValueError):
            GatingRecalibration(8, 6, activation="tanh")


class TestCrossAttention:
    def test_attention_rows_sum_to_one(self, tiny_config, tiny_model):
        recal = tiny_model.recalibration
        assert isinstance(recal, CrossAttentionRecalibration)
        main = torch.rand(2, tiny_config.recalib_channels, 8, 8)
        hints = torch.rand(2, tiny_config.hint_channels, 8, 8)
        recal(main, hints, keep_weights=True)
        weights = recal.last_attention_weights
        assert weights is not None
        sums = weights.sum(dim=-1)
        assert torch.allclose(sums, torch.ones_like(sums), atol=1e-6)

    def test_position_encoding_alignment(self):
        # Grids at different strides over the same extent share midpoint
        # geometry: position (row y, col x) on a 2x-coarser grid sits at the
        # midpoint of a 2x2 block on the finer one.
        fine = sincos_position_encoding(8, 8, 16)
        coarse = sincos_position_encoding(4, 4, 16)
        # coarse cell (0,0) midpoint = 0.125 in both axes; fine cell (0,0)
        # midpoint = 0.0625 -> encodings differ
        assert not torch.allclose(coarse[0], fine[0])
        # but every encoding row is unit-bounded and distinct
        assert coarse.abs().max() <= 1.0
        assert not torch.allclose(coarse[0], coarse[1])

    def test_position_encoding_requires_multiple_of_four(self):
        with pytest.raises(ValueError):
            sincos_position_encoding(4, 4, 18)

    def test_query_pooling_reduces_sequence(self):
        cfg = ModelConfig(
            num_keypoints=4, backbone_width=8, recalib_channels=8, hint_channels=8,
            hint_downsample=4, attention_dim=8, attention_heads=2, head_width=8,
            attention_key_pool=2, attention_query_pool=2,
        )
        model = build_model(cfg)
        main = torch.rand(1, 8, 8, 8)
        hints = torch.rand(1, 8, 8, 8)
        model.recalibration(main, hints, keep_weights=True)
        w = model.recalibration.last_attention_weights
        # queries 8x8 pooled by 2 -> 16 rows; keys 8x8 pooled by 2 -> 16 cols
        assert w.shape[-2:] == (16, 16)


class TestDecodeEquivalence:
    def test_torch_matches_numpy_reference(self, params):
        rng = np.random.default_rng(11)
        maps = rng.uniform(1e-4, 1.0, size=(2, 3, 24, 20))
        maps[0, 0, 0, 0] = 1.5  # corner peak exercises the border crop
        maps[1, 2, 23, 19] = 1.7
        got = soft_argmax_coords(
            torch.tensor(maps, dtype=torch.float64), params.patch_radius, params.temperature
        ).numpy()
        for b in range(2):
            want = decode_local_soft_argmax(HeatmapStack(maps[b]), params).keypoints.points
            assert np.abs(got[b] - want).max() < 1e-12

    def test_gradients_flow_through_decode(self):
        maps = torch.rand(1, 2, 16, 16, dtype=torch.float64, requires_grad=True)
        coords = soft_argmax_coords(maps, patch_radius=3, temperature=0.025)
        coords.sum().backward()
        assert maps.grad is not None
        assert torch.any(maps.grad != 0)

    def test_round_trip_through_encode(self, params):
        pts = np.array([[10.3, 7.8], [3.2, 12.6]])
        stack = encode_heatmaps(KeypointSet(pts), params, (32, 16))
        coords = soft_argmax_coords(
            torch.tensor(stack.maps[None]), params.patch_radius, params.temperature
        )[0].numpy()
        assert np.abs(coords - pts).max() <= 0.5


class TestTraining:
    @pytest.fixture
    def setup(self, tiny_config, params):
        rng = np.random.default_rng(0)
        pts = random_keypoint_dataset(6, tiny_config.num_keypoints, seed=0).clip(4, 28)
        samples = [
            TrainingSample(rng.uniform(0, 1, (1, 32, 32)).astype(np.float32), p) for p in pts
        ]
        subsets = select_subsets(
            np.stack([s.points for s in samples]),
            SubsetCriterion(distance_count=3, angle_count=2),
        )
        return samples, subsets

    def test_loss_decreases_and_history_logged(self, tiny_config, params, setup):
        samples, subsets = setup
        trainer = Trainer(build_model(tiny_config), subsets, LossWeights(), params, seed=0)
        history = trainer.fit(samples, steps=8, batch_size=2)
        assert len(history) == 8
        assert history[-1].total < history[0].total
        assert all(np.isfinite(h.total) for h in history)

    def test_training_deterministic_per_seed(self, tiny_config, params, setup):
        samples, subsets = setup
        run = lambda: Trainer(  # noqa: E731
            build_model(tiny_config), subsets, LossWeights(), params, seed=7
        ).fit(samples, steps=4, batch_size=2)
        a, b = run(), run()
        assert [r.total for r in a] == [r.total for r in b]

    def test_divergence_aborts_with_context(self, tiny_config, params, setup):
        samples, subsets = setup
        # An absurd learning rate reliably blows the loss past the limit.
        trainer = Trainer(
            build_model(tiny_config), subsets, LossWeights(angle_weight=1e9),
            params, learning_rate=1e6, seed=3,
        )
        with pytest.raises(TrainingDiverged) as exc:
            trainer.fit(samples, steps=50, batch_size=2)
        assert exc.value.seed == 3
        assert exc.value.step >= 0

    def test_morphology_disabled_skips_terms(self, tiny_config, params, setup):
        samples, subsets = setup
        trainer = Trainer(
            build_model(tiny_config), subsets,
            LossWeights(morphology_weight=0.0), params, seed=0,
        )
        rec = trainer.fit(samples, steps=1, batch_size=2)[0]
        assert rec.distance is None and rec.angle is None


class TestPredict:
    def test_prediction_shapes_and_pinning(self, tiny_config, params):
        from keyrefine.interaction import CorrectionEvent
        from keyrefine.codec import ImageGrid

        model = build_model(tiny_config)
        image = ImageGrid(np.random.default_rng(0).uniform(0, 1, (1, 32, 32)).astype(np.float32))
        first = predict(model, image, params=params)
        assert first.heatmaps.maps.shape == (4, 32, 32)
        assert len(first.keypoints) == 4
        assert np.all((first.heatmaps.maps > 0) & (first.heatmaps.maps < 1))

        ev = CorrectionEvent(2, (10.25, 20.5))
        second = predict(model, image, corrections=[ev], prev_pred=first.heatmaps, params=params)
        assert second.keypoints.points[2].tolist() == [10.25, 20.5]

    def test_unpinned_prediction_differs(self, tiny_config, params):
        from keyrefine.interaction import CorrectionEvent
        from keyrefine.codec import ImageGrid

        model = build_model(tiny_config)
        image = ImageGrid(np.zeros((1, 32, 32), dtype=np.float32))
        ev = CorrectionEvent(0, (7.3, 9.9))
        pinned = predict(model, image, corrections=[ev], params=params)
        raw = predict(model, image, corrections=[ev], params=params, pin=False)
        assert pinned.keypoints.points[0].tolist() == [7.3, 9.9]
        assert raw.keypoints.points[0].tolist() != [7.3, 9.9]


class TestCheckpoint:
    def test_round_trip_preserves_predictions(self, tiny_config, params, tmp_path):
        from keyrefine.codec import ImageGrid

        model = build_model(tiny_config)
        subsets = MorphologySubsets(pairs=[], triples=[])
        path = tmp_path / "model.pt"
        save_checkpoint(path, model, params, subsets, meta={"note": "test"})
        loaded = load_checkpoint(path)
        assert loaded.meta["note"] == "test"
        assert loaded.config == tiny_config
        image = ImageGrid(np.random.default_rng(1).uniform(0, 1, (1, 32, 32)).astype(np.float32))
        a = predict(model, image, params=params)
        b = predict(loaded.model, image, params=loaded.params)
        assert np.array_equal(a.heatmaps.maps, b.heatmaps.maps)

    def test_missing_file_and_bad_version(self, tmp_path):
        with pytest.raises(WorkbenchError):
            load_checkpoint(tmp_path / "nope.pt")
        torch.save({"format_version": 99}, tmp_path / "bad.pt")
        with pytest.raises(WorkbenchError):
            load_checkpoint(tmp_path / "bad.pt")

    def test_tampered_subsets_detected(self, tiny_config, params, tmp_path):
        model = build_model(tiny_config)
        subsets = MorphologySubsets(pairs=[], triples=[])
        path = tmp_path / "model.pt"
        save_checkpoint(path, model, params, subsets)
        payload = torch.load(path, map_location="cpu", weights_only=True)
        payload["subsets"]["pairs"] = [[[0, 1], 0.0]]  # not what was fingerprinted
        torch.save(payload, path)
        with pytest.raises(WorkbenchError):
            load_checkpoint(path)


def test_parameter_count_matches_torch(tiny_model):
    manual = sum(p.numel() for p in tiny_model.parameters())
    assert parameter_count(tiny_model) == manual
