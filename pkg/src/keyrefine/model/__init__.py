"""Trainable interactive keypoint refinement network."""

from .network import (
    ModelConfig,
    InteractiveKeypointNet,
    GatingRecalibration,
    CrossAttentionRecalibration,
    build_model,
    parameter_count,
)
from .decode import soft_argmax_coords
from .losses import TrainingLossTerms, training_loss, morphology_terms
from .training import (
    Batch,
    BatchBuilder,
    LossRecord,
    PredictionResult,
    Trainer,
    TrainingDiverged,
    TrainingSample,
    predict,
)
from .checkpoint import save_checkpoint, load_checkpoint, LoadedModel

__all__ = [
    "ModelConfig",
    "InteractiveKeypointNet",
    "GatingRecalibration",
    "CrossAttentionRecalibration",
    "build_model",
    "parameter_count",
    "soft_argmax_coords",
    "TrainingLossTerms",
    "training_loss",
    "morphology_terms",
    "Batch",
    "BatchBuilder",
    "LossRecord",
    "PredictionResult",
    "Trainer",
    "TrainingDiverged",
    "TrainingSample",
    "predict",
    "save_checkpoint",
    "load_checkpoint",
    "LoadedModel",
]
