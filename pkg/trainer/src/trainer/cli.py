"""Command line entry point: fit a model on an exported dataset."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import ModelConfig, TrainConfig, paper_config
from .data import TripletDataset
from .models import build_model, count_parameters
from .train import evaluate, metrics_to_csv, train


@click.command()
@click.option("--dataset", "stem", required=True, type=click.Path(), help="Dataset stem.")
@click.option(
    "--model",
    "variant",
    required=True,
    type=click.Choice(["bcjrformer", "convbcjrformer", "ecct"]),
)
@click.option("--steps", type=int, default=2000, show_default=True)
@click.option("--batch", type=int, default=128, show_default=True)
@click.option("--d-model", type=int, default=None, help="Override embedding width.")
@click.option("--layers", type=int, default=None, help="Override layer count.")
@click.option("--heads", type=int, default=None, help="Override head count.")
@click.option("--lr", type=float, default=1e-3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--paper-scale",
    is_flag=True,
    help="Use the published hyperparameters instead of the toy defaults.",
)
@click.option("--out", "out_path", type=click.Path(), default=None, help="Metrics CSV path.")
def main(stem, variant, steps, batch, d_model, layers, heads, lr, seed, paper_scale, out_path):
    """Train a transformer decoder on a dataset triplet."""
    if paper_scale:
        cfg = paper_config(variant)
    else:
        cfg = ModelConfig(variant, d_model=48, n_layers=2, n_heads=4, n_blocks=1)
    if d_model is not None:
        cfg.d_model = d_model
    if layers is not None:
        cfg.n_layers = layers
    if heads is not None:
        cfg.n_heads = heads
    try:
        data = TripletDataset(stem)
        model = build_model(cfg, data.manifest)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"{variant}: {count_parameters(model):,} parameters, {len(data)} items")
    tcfg = TrainConfig(
        iterations=steps, batch_size=batch, lr_peak=lr, warmup=min(100, steps - 1), seed=seed
    )
    log = train(model, data, tcfg)
    for entry in log:
        click.echo(f"step {entry['step']}: loss {entry['loss']:.4f} lr {entry['lr']:.2e}")
    row = evaluate(model, data, loss=log[-1]["loss"] if log else float("nan"))
    csv_text = metrics_to_csv([row])
    if out_path:
        Path(out_path).write_text(csv_text)
    click.echo(csv_text.rstrip())
