"""Command-line entry points.

Every subcommand reads the same YAML config (``--config``); flags override
the few values that change per run.  ``KEYREFINE_PORT`` and
``KEYREFINE_DATA_ROOT`` override the service port and data root.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .codec import KeypointSet
from .config import WorkbenchConfig, load_config
from .cvm import cvm_features, error_tolerance_px, sensitivity_analysis
from .datasets import DatasetManifest, export_synthetic, load_samples, read_annotations
from .errors import WorkbenchError
from .evaluation import (
    EvalProtocol,
    interaction_curves,
    model_predictor,
    revision_comparison,
    run_interactive_eval,
    threshold_failure_rate,
)
from .growth import (
    annual_growth_rate,
    find_growth_peak,
    peak_stage_window,
    read_cohort,
    standard_growth_curve,
    write_cohort,
)
from .model.checkpoint import load_checkpoint, save_checkpoint
from .model.network import build_model
from .model.training import Trainer
from .morphology import LossWeights, SubsetCriterion, select_subsets


def _load_manifest(config: WorkbenchConfig) -> DatasetManifest:
    path = config.dataset_path / "manifest.json"
    if not path.exists():
        raise WorkbenchError(
            f"dataset manifest not found at {path}; run `keyrefine simulate` first"
            " or point data_root/dataset at an existing dataset"
        )
    return DatasetManifest.load(path)


def cmd_simulate(config: WorkbenchConfig, args: argparse.Namespace) -> int:
    from .synthetic import (
        CervicalDatasetConfig,
        SpineBenchmarkConfig,
        generate_cervical_dataset,
        generate_spine_benchmark,
    )
    from .growth import CohortRecord

    generator = args.generator or config.simulate.generator
    num_images = args.num_images or config.simulate.num_images
    seed = config.simulate.seed if args.seed is None else args.seed
    name = config.simulate.name

    if generator == "spine":
        dataset = generate_spine_benchmark(
            SpineBenchmarkConfig(num_images=num_images, seed=seed)
        )
    elif generator == "cervical":
        dataset = generate_cervical_dataset(
            CervicalDatasetConfig(num_images=num_images, seed=seed)
        )
    else:
        raise WorkbenchError(f"unknown generator {generator!r}; use spine or cervical")

    out_root = config.data_path / name
    manifest = export_synthetic(dataset, out_root, name)
    print(f"wrote {len(dataset)} images to {out_root}")
    print(f"splits: " + ", ".join(f"{k}={len(v)}" for k, v in manifest.splits.items()))

    if generator == "cervical":
        cohort = [
            CohortRecord(
                age=m["age"], sex=m["sex"], values=m["features"], subject_id=m["subject_id"]
            )
            for m in dataset.meta
        ]
        write_cohort(out_root / "cohort.jsonl", cohort)
        print(f"wrote cohort of {len(cohort)} records to {out_root / 'cohort.jsonl'}")
    return 0


def cmd_train(config: WorkbenchConfig, args: argparse.Namespace) -> int:
    manifest = _load_manifest(config)
    train_samples = load_samples(config.dataset_path, manifest, split="train")
    settings = config.train
    steps = args.steps or settings.steps
    seed = settings.seed if args.seed is None else args.seed

    criterion = SubsetCriterion(
        distance_count=settings.distance_count, angle_count=settings.angle_count
    )
    subsets = select_subsets([KeypointSet(s.points) for s in train_samples], criterion)

    model_config = config.model
    if model_config.num_keypoints != manifest.num_keypoints:
        model_config = type(model_config)(
            **{**model_config.to_dict(), "num_keypoints": manifest.num_keypoints}
        )
    model_config = type(model_config)(**{**model_config.to_dict(), "seed": seed})
    model = build_model(model_config)

    trainer = Trainer(
        model,
        subsets,
        LossWeights(settings.angle_weight, settings.morphology_weight),
        config.codec,
        learning_rate=settings.learning_rate,
        seed=seed,
    )
    records = trainer.fit(
        train_samples,
        steps=steps,
        batch_size=settings.batch_size,
        log_every=settings.log_every,
    )

    checkpoint_path = config.data_path / settings.checkpoint
    save_checkpoint(
        checkpoint_path,
        model,
        config.codec,
        subsets,
        meta={
            "dataset": manifest.name,
            "keypoint_names": list(manifest.keypoint_names),
            "image_size": list(manifest.image_size),
            "steps": steps,
            "seed": seed,
        },
    )
    history_path = checkpoint_path.with_suffix(".history.json")
    history_path.write_text(json.dumps([r.to_dict() for r in records], indent=1))
    print(f"trained {steps} steps; final loss {records[-1].total:.4f}")
    print(f"checkpoint: {checkpoint_path}")
    print(f"history: {history_path}")
    return 0


def cmd_eval(config: WorkbenchConfig, args: argparse.Namespace) -> int:
    manifest = _load_manifest(config)
    checkpoint_path = Path(args.checkpoint) if args.checkpoint else (
        config.data_path / config.train.checkpoint
    )
    loaded = load_checkpoint(checkpoint_path)
    samples = load_samples(config.dataset_path, manifest, split=config.eval.split)
    predictor = model_predictor(loaded.model, loaded.params)

    protocol = EvalProtocol(
        max_clicks=config.eval.max_clicks,
        target_mre=config.eval.target_mre,
        correction_policy=config.eval.correction_policy,
        revision=config.eval.revision,
    )
    report = run_interactive_eval(predictor, samples, protocol)
    comparison = revision_comparison(predictor, samples)
    beta_grid = [0.5, 1.0, 2.0, 4.0, 8.0]
    curves = interaction_curves(report, beta_grid)
    fr0 = threshold_failure_rate(report.zero_click_mres(), beta_grid)

    payload = report.to_dict()
    payload["revision_comparison"] = {
        "mean_manual": comparison.mean_manual,
        "mean_model": comparison.mean_model,
        "model_no_worse_fraction": comparison.model_no_worse_fraction,
    }
    payload["curves"] = curves
    payload["threshold_failure_rate"] = {str(k): v for k, v in fr0.items()}

    report_path = config.data_path / config.eval.report
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(json.dumps(payload, indent=1))

    print(f"images: {len(samples)}  protocol: alpha={protocol.max_clicks} beta={protocol.target_mre}")
    print(f"zero-click MRE: {report.mean_mre_per_round()[0]:.3f}px")
    print(f"NoC: {report.mean_noc():.3f}  FR: {report.failure_rate():.2f}%")
    print(
        f"revision: manual {comparison.mean_manual:.3f}px, model {comparison.mean_model:.3f}px,"
        f" model no worse on {100 * comparison.model_no_worse_fraction:.1f}% of images"
    )
    print(f"report: {report_path}")
    return 0


def cmd_serve(config: WorkbenchConfig, args: argparse.Namespace) -> int:
    import uvicorn

    from .service.runtime import assemble_service

    if args.port is not None:
        config.service.port = args.port
    runtime = assemble_service(config)
    uvicorn.run(runtime.app, host=config.service.host, port=config.service.port)
    return 0


def cmd_cvm(config: WorkbenchConfig, args: argparse.Namespace) -> int:
    if args.annotations:
        annotations_path = Path(args.annotations)
    else:
        annotations_path = config.dataset_path / "annotations.jsonl"
    records = read_annotations(annotations_path)
    indices = range(len(records)) if args.all else [args.index]
    for i in indices:
        record = records[i]
        features = cvm_features(record.keypoints)
        sensitivity = sensitivity_analysis(record.keypoints)
        print(
            json.dumps(
                {
                    "image": record.image,
                    "features": features,
                    "sensitivity": sensitivity,
                    "error_tolerance_px": error_tolerance_px(sensitivity),
                }
            )
        )
    return 0


def cmd_growth(config: WorkbenchConfig, args: argparse.Namespace) -> int:
    from .service.runtime import default_cohort

    sex = args.sex or config.growth.sex
    feature = args.feature or config.growth.feature
    if config.growth.cohort is not None:
        cohort = read_cohort(config.data_path / config.growth.cohort)
    else:
        cohort = default_cohort()
    curve = standard_growth_curve(cohort, feature, sex)
    peak = find_growth_peak(curve)
    out = {
        "curve": curve.to_dict(),
        "annual_rates": [
            {"interval": list(interval), "rate": rate}
            for interval, rate in annual_growth_rate(curve)
        ],
        "peak": peak.to_dict(),
    }
    if peak.next_median is not None:
        window = peak_stage_window(peak)
        out["stage_window"] = [window.lower, window.upper]
    print(json.dumps(out, indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="keyrefine",
        description="Interactive keypoint refinement: training, evaluation, and serving.",
    )
    parser.add_argument("--config", type=str, default=None, help="YAML config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    p.add_argument("--generator", choices=["spine", "cervical"], default=None)
    p.add_argument("--num-images", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("train", help="train a model on the configured dataset")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("eval", help="run the interactive evaluation protocol")
    p.add_argument("--checkpoint", type=str, default=None)

    p = sub.add_parser("serve", help="start the annotation HTTP service")
    p.add_argument("--port", type=int, default=None)

    p = sub.add_parser("cvm", help="compute cervical features for annotations")
    p.add_argument("--annotations", type=str, default=None)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--all", action="store_true")

    p = sub.add_parser("growth", help="growth curve, annual rates, and peak")
    p.add_argument("--sex", type=str, default=None)
    p.add_argument("--feature", type=str, default=None)

    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "eval": cmd_eval,
    "serve": cmd_serve,
    "cvm": cmd_cvm,
    "growth": cmd_growth,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        return COMMANDS[args.command](config, args)
    except WorkbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
