from .base import (CLASSIFIER_IDS, TrainedModel, gini_importance, load_model,
                   predict_label, predict_score, save_model, train)
from .mlp import MlpSpec, finetune_mlp, train_mlp

__all__ = [
    "CLASSIFIER_IDS", "TrainedModel", "train", "predict_score", "predict_label",
    "gini_importance", "save_model", "load_model",
    "MlpSpec", "train_mlp", "finetune_mlp",
]
