"""Command-line interface: `idscodec run | dataset | hist`.

Exit codes: 0 success, 2 configuration error, 3 decode-cap refusal.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .bcjr import ComplexityError
from .pipeline import (
    ConfigError,
    ExperimentConfig,
    RareEventError,
    generate_training_set,
    per_position_histogram,
    run_experiment,
    write_report,
)

EXIT_CONFIG = 2
EXIT_CAP = 3


def _load_config(path: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.from_json(Path(path).read_text())
    except FileNotFoundError as e:
        raise ConfigError("<file>", str(e)) from e


@click.group()
def main() -> None:
    """Monte Carlo toolkit for codes on insertion/deletion/substitution channels."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--trials", type=int, default=None, help="Override the configured trial count.")
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--allow-rare", is_flag=True, help="Report grid points with <10 observed errors.")
@click.option(
    "--exclude-markers",
    is_flag=True,
    help="Score inner-only marker chains on outer positions only.",
)
@click.option("--out", "out_stem", type=click.Path(), default=None, help="Output path stem.")
def run(config_path, trials, seed, threads, allow_rare, exclude_markers, out_stem):
    """Sweep the channel grid and write CSV, JSON, and a rendered figure."""
    try:
        cfg = _load_config(config_path)
        rows = run_experiment(
            cfg,
            trials=trials,
            seed=seed,
            threads=threads,
            allow_rare=allow_rare,
            exclude_markers=exclude_markers,
        )
    except ConfigError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    except ComplexityError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CAP)
    except RareEventError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    paths = write_report(rows, cfg, out_stem if out_stem else cfg.output)
    for r in rows:
        click.echo(
            f"p={r.p:g} p_sub={r.p_sub:g} M={r.m} trials={r.trials} "
            f"ber={r.ber:.6g} ser={r.ser:.6g} failures={r.failures}"
        )
    click.echo("wrote: " + ", ".join(str(p) for p in paths))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--count", type=int, default=None, help="Number of items (default: trials).")
@click.option(
    "--variant",
    type=click.Choice(["auto", "window", "conv", "ecct"]),
    default="auto",
    show_default=True,
)
def dataset(config_path, out_dir, count, variant):
    """Generate a training dataset (manifest + feature/target blobs)."""
    try:
        cfg = _load_config(config_path)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        manifest = generate_training_set(cfg, out / cfg.name, count=count, variant=variant)
    except ConfigError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    except ComplexityError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CAP)
    click.echo(
        f"wrote {manifest['count']} items ({manifest['variant']}) to "
        f"{out / cfg.name}.manifest.json"
    )


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--trials", type=int, default=None)
@click.option("--out", "out_stem", type=click.Path(), default=None, help="Output path stem.")
def hist(config_path, trials, out_stem):
    """Per-position symbol error histogram for a fixed codeword."""
    try:
        cfg = _load_config(config_path)
        ser, dist = per_position_histogram(cfg, trials=trials)
    except ConfigError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    except ComplexityError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CAP)
    stem = Path(out_stem if out_stem else cfg.output)
    stem.parent.mkdir(parents=True, exist_ok=True)
    lines = ["position,ser,marker_distance"]
    for i, (s, d) in enumerate(zip(ser, dist)):
        lines.append(f"{i},{s!r},{d}")
    csv_path = stem.with_suffix(".hist.csv")
    csv_path.write_text("\n".join(lines) + "\n")

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(ser)), ser, width=1.0)
    ax.set_xlabel("inner position")
    ax.set_ylabel("SER")
    ax.set_title(cfg.name)
    fig.tight_layout()
    png_path = stem.with_suffix(".hist.png")
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    click.echo(f"wrote: {csv_path}, {png_path}")


if __name__ == "__main__":
    main()
