"""Training package: losses, seeding, checkpoints, trainer, evaluator and ablation runner."""

from training.ablation import ABLATION_VARIANTS, AblationResult, AblationVariant, run_ablation
from training.checkpoint import FORMAT_VERSION, Checkpoint, build_model, load_checkpoint, save_checkpoint
from training.evaluator import evaluate, evaluate_model, evaluate_predictor, predict, predict_images
from training.losses import masked_cross_entropy, masked_smooth_l1, multitask_loss
from training.seeding import seed_everything, select_device
from training.trainer import Trainer, TrainResult, build_samples, train

__all__ = [
    "ABLATION_VARIANTS",
    "AblationResult",
    "AblationVariant",
    "run_ablation",
    "FORMAT_VERSION",
    "Checkpoint",
    "build_model",
    "load_checkpoint",
    "save_checkpoint",
    "evaluate",
    "evaluate_model",
    "evaluate_predictor",
    "predict",
    "predict_images",
    "masked_cross_entropy",
    "masked_smooth_l1",
    "multitask_loss",
    "seed_everything",
    "select_device",
    "Trainer",
    "TrainResult",
    "build_samples",
    "train",
]
