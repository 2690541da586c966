"""Interactive evaluation harness: NoC/FR oracles, policies, revision modes.

The scripted scenario is computed by hand and frozen:
  per-keypoint radial errors per image (K=4):
    image 0: [0,0,0,0]      MREs by round [0, 0, 0, 0]
    image 1: [4,0,0,0]      MREs [1, 0, 0, 0]
    image 2: [4,4,4,0]      MREs [3, 2, 1, 0]
    image 3: [8,8,8,8]      MREs [8, 6, 4, 2]   (alpha=3: never below 1.0)
    image 4: [2,1,0,0]      MREs [0.75, 0.25, 0, 0]
  with alpha=3, beta=1.0:  NoC = [0,1,3,3,0] -> mean 1.4;  FR = 20%
  with beta=2.5:           NoC = [0,0,1,3,0] -> mean 0.8;  FR = 0%
"""

import math

import numpy as np
import pytest

from keyrefine.codec import GaussianParams, HeatmapStack, ImageGrid, KeypointSet
from keyrefine.errors import ShapeError
from keyrefine.evaluation import (
    EvalProtocol,
    EvalReport,
    ImageTrajectory,
    evaluate_image,
    interaction_curves,
    model_predictor,
    revision_comparison,
    run_interactive_eval,
    threshold_failure_rate,
    worst_keypoint,
)
from keyrefine.model import PredictionResult, TrainingSample

K = 4
SIZE = 32
# per-image, per-keypoint error offsets along +x
OFFSETS = np.array(
    [
        [0.0, 0.0, 0.0, 0.0],
        [4.0, 0.0, 0.0, 0.0],
        [4.0, 4.0, 4.0, 0.0],
        [8.0, 8.0, 8.0, 8.0],
        [2.0, 1.0, 0.0, 0.0],
    ]
)
GT = np.tile(np.array([[8.0, 8.0], [8.0, 20.0], [20.0, 8.0], [20.0, 20.0]]), (5, 1, 1))


def scripted_samples():
    return [
        TrainingSample(np.full((1, SIZE, SIZE), i / 8, dtype=np.float32), GT[i])
        for i in range(len(OFFSETS))
    ]


class CopyPredictor:
    """Round 0 returns gt + offsets; later rounds copy the previous points
    with corrections pinned, like a perfect no-op revision model."""

    def __init__(self, offsets=OFFSETS):
        self.offsets = offsets
        self.calls = 0

    def __call__(self, image, corrections, prev):
        self.calls += 1
        idx = int(round(float(image.pixels[0, 0, 0]) * 8))
        points = GT[idx].copy()
        points[:, 0] += self.offsets[idx]
        for c in corrections:
            points[c.keypoint_index] = c.coordinate
        return PredictionResult(
            heatmaps=HeatmapStack.zeros(K, (SIZE, SIZE)),
            keypoints=KeypointSet(points),
            confidence=np.ones(K),
            low_confidence=np.zeros(K, dtype=bool),
        )


class TestWorstKeypoint:
    def test_picks_largest_error(self):
        pred = np.array([[0.0, 0.0], [5.0, 0.0], [1.0, 1.0]])
        gt = np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
        assert worst_keypoint(pred, gt) == 1

    def test_ties_resolve_to_lowest_index(self):
        pred = np.array([[3.0, 0.0], [0.0, 3.0], [1.0, 0.0]])
        gt = np.zeros((3, 2))
        assert worst_keypoint(pred, gt) == 0


class TestTrajectory:
    def test_achieved_round_is_strictly_below(self):
        t = ImageTrajectory(mre_per_round=[3.0, 2.0, 1.0, 0.0], corrected_keypoints=[0, 1, 2])
        assert t.achieved_round(beta=1.0, alpha=3) == 3  # 1.0 < 1.0 is false
        assert t.achieved_round(beta=1.01, alpha=3) == 2
        assert t.noc(beta=0.5, alpha=2) == 2  # failure convention: NoC = alpha
        assert t.failed(beta=0.5, alpha=2)

    def test_alpha_truncates_rounds(self):
        t = ImageTrajectory(mre_per_round=[5.0, 0.1], corrected_keypoints=[0])
        assert t.noc(beta=1.0, alpha=0) == 0  # round 1 not allowed
        assert t.noc(beta=1.0, alpha=1) == 1


class TestScriptedScenario:
    @pytest.fixture
    def report(self) -> EvalReport:
        protocol = EvalProtocol(max_clicks=3, target_mre=1.0, revision="model")
        return run_interactive_eval(CopyPredictor(), scripted_samples(), protocol)

    def test_recorded_mres_match_hand_computation(self, report):
        expected = [
            [0.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [3.0, 2.0, 1.0, 0.0],
            [8.0, 6.0, 4.0, 2.0],
            [0.75, 0.25, 0.0, 0.0],
        ]
        got = [t.mre_per_round for t in report.trajectories]
        assert got == expected

    def test_noc_and_fr_at_default_beta(self, report):
        assert [t.noc(1.0, 3) for t in report.trajectories] == [0, 1, 3, 3, 0]
        assert report.mean_noc() == 1.4
        assert report.failure_rate() == 20.0

    def test_noc_and_fr_at_looser_beta(self, report):
        assert report.mean_noc(beta=2.5) == 0.8
        assert report.failure_rate(beta=2.5) == 0.0

    def test_mean_mre_per_round(self, report):
        assert report.mean_mre_per_round() == [2.55, 1.65, 1.0, 0.4]

    def test_manual_revision_equals_copy_model(self):
        # A model that merely copies forward with pinning is exactly manual
        # revision; both protocols must agree round by round.
        base = EvalProtocol(max_clicks=3, target_mre=1.0)
        manual = run_interactive_eval(
            CopyPredictor(),
            scripted_samples(),
            EvalProtocol(max_clicks=3, target_mre=1.0, revision="manual"),
        )
        model = run_interactive_eval(CopyPredictor(), scripted_samples(), base)
        for a, b in zip(manual.trajectories, model.trajectories):
            assert a.mre_per_round == b.mre_per_round
            assert a.corrected_keypoints == b.corrected_keypoints

    def test_interaction_curves_consistent(self, report):
        curves = interaction_curves(report, beta_grid=[0.5, 1.0, 2.5, 10.0])
        assert curves["mre_vs_clicks"]["mean_mre"] == report.mean_mre_per_round()
        noc = curves["noc_vs_beta"]["mean_noc"]
        fr = curves["fr_vs_beta"]["failure_rate"]
        # looser beta never increases either aggregate
        assert all(a >= b for a, b in zip(noc, noc[1:]))
        assert all(a >= b for a, b in zip(fr, fr[1:]))
        assert noc[1] == 1.4 and fr[1] == 20.0

    def test_alpha_monotonicity(self, report):
        frs = [report.failure_rate(alpha=a) for a in range(4)]
        assert all(a >= b for a, b in zip(frs, frs[1:]))
        with pytest.raises(ShapeError):
            report.failure_rate(alpha=4)  # beyond recorded rounds

    def test_report_round_trip(self, report, tmp_path):
        report.save(tmp_path / "report.json")
        import json

        data = json.loads((tmp_path / "report.json").read_text())
        assert data["mean_noc"] == 1.4
        assert data["failure_rate"] == 20.0
        assert len(data["images"]) == 5


class TestThresholdFailureRate:
    def test_strictly_greater_convention(self):
        mres = [0.0, 1.0, 3.0, 8.0, 0.75]
        rates = threshold_failure_rate(mres, [0.0, 0.5, 1.0, 8.0])
        assert rates[0.0] == 80.0  # 0 is not > 0
        assert rates[0.5] == 80.0
        assert rates[1.0] == 40.0  # 1.0 is not > 1.0
        assert rates[8.0] == 0.0

    def test_rejects_empty(self):
        with pytest.raises(ShapeError):
            threshold_failure_rate([], [1.0])


class TestPolicies:
    def test_random_policy_corrects_uncorrected_only(self):
        protocol = EvalProtocol(max_clicks=4, target_mre=0.01, correction_policy="random", seed=5)
        report = run_interactive_eval(CopyPredictor(), scripted_samples(), protocol)
        for t in report.trajectories:
            assert sorted(t.corrected_keypoints) == [0, 1, 2, 3]

    def test_random_policy_deterministic_per_seed(self):
        p = lambda s: EvalProtocol(  # noqa: E731
            max_clicks=3, target_mre=0.01, correction_policy="random", seed=s
        )
        a = run_interactive_eval(CopyPredictor(), scripted_samples(), p(3))
        b = run_interactive_eval(CopyPredictor(), scripted_samples(), p(3))
        assert [t.corrected_keypoints for t in a.trajectories] == [
            t.corrected_keypoints for t in b.trajectories
        ]
        c = run_interactive_eval(CopyPredictor(), scripted_samples(), p(4))
        assert [t.corrected_keypoints for t in a.trajectories] != [
            t.corrected_keypoints for t in c.trajectories
        ]

    def test_worst_first_order_in_scripted_scenario(self):
        protocol = EvalProtocol(max_clicks=3, target_mre=1.0)
        t = evaluate_image(CopyPredictor(), scripted_samples()[4], protocol, image_index=4)
        # errors [2,1,0,0]: worst first corrects 0 then 1, then ties at 0.
        assert t.corrected_keypoints[:2] == [0, 1]

    def test_protocol_validation(self):
        with pytest.raises(ShapeError):
            EvalProtocol(max_clicks=-1)
        with pytest.raises(ShapeError):
            EvalProtocol(target_mre=0.0)
        with pytest.raises(ShapeError):
            EvalProtocol(correction_policy="best-first")
        with pytest.raises(ShapeError):
            EvalProtocol(revision="oracle")


class TestFailureHandling:
    def test_inference_error_becomes_failed_trajectory(self):
        def broken(image, corrections, prev):
            raise RuntimeError("conv exploded")

        t = evaluate_image(broken, scripted_samples()[0], EvalProtocol(max_clicks=2))
        assert t.error == "RuntimeError: conv exploded"
        assert t.mre_per_round == [math.inf, math.inf, math.inf]
        assert t.failed(beta=1e9, alpha=2)

    def test_midway_error_preserves_earlier_rounds(self):
        calls = {"n": 0}

        def flaky(image, corrections, prev):
            calls["n"] += 1
            if calls["n"] > 1:
                raise RuntimeError("boom")
            return CopyPredictor()(image, corrections, prev)

        t = evaluate_image(flaky, scripted_samples()[2], EvalProtocol(max_clicks=3), 2)
        assert t.mre_per_round[0] == 3.0
        assert t.mre_per_round[-1] == math.inf
        assert t.error == "RuntimeError: boom"
        report = EvalReport(EvalProtocol(max_clicks=3), [t])
        assert report.failure_rate() == 100.0


class TestRevisionComparison:
    def test_copy_model_matches_manual_exactly(self):
        comp = revision_comparison(CopyPredictor(), scripted_samples())
        assert np.array_equal(comp.manual_mres, comp.model_mres)
        assert comp.model_no_worse_fraction == 1.0

    def test_worse_model_detected(self):
        class Worse(CopyPredictor):
            def __call__(self, image, corrections, prev):
                res = super().__call__(image, corrections, prev)
                if corrections:  # regress every other keypoint by 1 px
                    res.keypoints.points[:, 1] += 1.0
                return res

        comp = revision_comparison(Worse(), scripted_samples())
        assert comp.mean_model > comp.mean_manual
        assert comp.model_no_worse_fraction < 1.0


class TestModelPredictorAdapter:
    def test_chains_previous_heatmaps(self, tiny_config, params):
        from keyrefine.model import build_model

        model = build_model(tiny_config)
        predictor = model_predictor(model, params)
        rng = np.random.default_rng(0)
        sample = TrainingSample(
            rng.uniform(0, 1, (1, SIZE, SIZE)).astype(np.float32),
            rng.uniform(8, 24, size=(tiny_config.num_keypoints, 2)),
        )
        protocol = EvalProtocol(max_clicks=2, target_mre=0.5)
        t = evaluate_image(predictor, sample, protocol)
        assert t.error is None
        assert len(t.mre_per_round) == 3
        assert all(np.isfinite(m) for m in t.mre_per_round)
        # corrections pin to groundtruth, so the corrected keypoint stops
        # contributing error and the MRE cannot increase from that alone
        assert len(t.corrected_keypoints) == 2
