"""Model and training configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

VARIANTS = ("bcjrformer", "convbcjrformer", "ecct")
AGGREGATIONS = ("mean", "linear")


@dataclass
class ModelConfig:
    """Architecture hyperparameters.

    Attributes:
        variant: One of "bcjrformer", "convbcjrformer", "ecct".
        d_model: Embedding width d_k.
        n_layers: Self-attention layers (per stream for convbcjrformer).
        n_heads: Attention heads per layer.
        n_blocks: Decoder blocks (convbcjrformer only); each block stacks
            the two self-attention streams plus one cross-attention block.
        aggregation: How multi-copy predictions are combined at inference.
        sequence_embedding: Add a learned per-copy embedding.
        cross_masking: Apply the generator-support cross-attention masks
            (convbcjrformer) instead of full cross-attention.
    """

    variant: str
    d_model: int = 96
    n_layers: int = 6
    n_heads: int = 8
    n_blocks: int = 4
    aggregation: str = "mean"
    sequence_embedding: bool = True
    cross_masking: bool = True

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.d_model % self.n_heads:
            raise ValueError("d_model must be divisible by n_heads")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"unknown aggregation {self.aggregation!r}")


def paper_config(variant: str) -> ModelConfig:
    """Published hyperparameters for each variant."""
    if variant == "bcjrformer":
        return ModelConfig(variant, d_model=96, n_layers=6, n_heads=8)
    if variant == "ecct":
        return ModelConfig(variant, d_model=128, n_layers=8, n_heads=8)
    if variant == "convbcjrformer":
        return ModelConfig(variant, d_model=96, n_layers=3, n_heads=6, n_blocks=4)
    raise ValueError(f"unknown variant {variant!r}")


@dataclass
class TrainConfig:
    """Optimization settings: Adam with warmup plus cosine decay."""

    iterations: int = 2000
    batch_size: int = 128
    lr_peak: float = 1e-3
    lr_floor: float = 1e-5
    warmup: int = 100
    seed: int = 0
    log_every: int = 200
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.iterations <= 0:
            raise ValueError("iterations must be positive")
        if not 0 <= self.warmup < self.iterations:
            raise ValueError("warmup must be < iterations")
