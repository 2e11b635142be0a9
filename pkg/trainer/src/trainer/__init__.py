"""Transformer decoders trained on idscodec dataset exports."""

from .config import ModelConfig, TrainConfig, paper_config
from .data import TripletDataset
from .models import (
    BCJRFormer,
    ConvBCJRFormer,
    ECCT,
    build_model,
    count_parameters,
)
from .train import evaluate, metrics_to_csv, train, window_argmax_baseline

__all__ = [
    "BCJRFormer",
    "ConvBCJRFormer",
    "ECCT",
    "ModelConfig",
    "TrainConfig",
    "TripletDataset",
    "build_model",
    "count_parameters",
    "evaluate",
    "metrics_to_csv",
    "paper_config",
    "train",
    "window_argmax_baseline",
]
