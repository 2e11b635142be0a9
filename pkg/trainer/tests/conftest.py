"""Shared toy datasets, generated once per session through the core CLI API.

The trainer package itself never imports the core library; these fixtures
produce the dataset triplet files the trainer consumes.
"""

import pytest

from trainer import TripletDataset


def _generate(tmp, name, raw, count):
    from idscodec.pipeline import ExperimentConfig, generate_training_set

    stem = tmp / name
    generate_training_set(ExperimentConfig.from_dict(raw), stem, count=count)
    return stem


@pytest.fixture(scope="session")
def window_dataset(tmp_path_factory):
    """n_out=24 marker dataset at p=0.01 (single copy)."""
    tmp = tmp_path_factory.mktemp("win")
    stem = _generate(
        tmp,
        "toywin",
        {
            "name": "toywin",
            "field": 2,
            "outer": {"type": "random", "n_out": 24},
            "inner": {"type": "marker", "marker": "001", "interval": 6},
            "decoder": {"chain": "bcjr"},
            "channel": {"p": [0.01], "p_sub": 0.012},
            "trials": 4096,
            "seed": 5,
            "output": "toywin",
        },
        4096,
    )
    return TripletDataset(stem)


@pytest.fixture(scope="session")
def multicopy_dataset(tmp_path_factory):
    """Two-copy variant of the window dataset."""
    tmp = tmp_path_factory.mktemp("win2")
    stem = _generate(
        tmp,
        "toywin2",
        {
            "name": "toywin2",
            "field": 2,
            "outer": {"type": "random", "n_out": 24},
            "inner": {"type": "marker", "marker": "001", "interval": 6},
            "decoder": {"chain": "bcjr_joint"},
            "copies": 2,
            "channel": {"p": [0.03], "p_sub": 0.012},
            "trials": 256,
            "seed": 9,
            "output": "toywin2",
        },
        256,
    )
    return TripletDataset(stem)


@pytest.fixture(scope="session")
def conv_dataset(tmp_path_factory):
    """n_out=12 convolutional dataset at p=0.05."""
    tmp = tmp_path_factory.mktemp("conv")
    stem = _generate(
        tmp,
        "toyconv",
        {
            "name": "toyconv",
            "field": 2,
            "outer": {"type": "random", "n_out": 12},
            "inner": {"type": "conv", "polys": "5,7"},
            "decoder": {"chain": "bcjr_conv"},
            "channel": {"p": [0.05], "p_sub": 0.012},
            "trials": 2048,
            "seed": 6,
            "output": "toyconv",
        },
        2048,
    )
    return TripletDataset(stem)


@pytest.fixture(scope="session")
def ecct_dataset(tmp_path_factory):
    """Hamming(7,4) noise-prediction dataset."""
    tmp = tmp_path_factory.mktemp("ecct")
    stem = _generate(
        tmp,
        "toyecct",
        {
            "name": "toyecct",
            "field": 2,
            "outer": {"type": "builtin", "name": "hamming_7_4"},
            "inner": {"type": "marker", "marker": "01", "interval": 3},
            "decoder": {"chain": "bcjr", "bp": True},
            "channel": {"p": [0.05], "p_sub": 0.02},
            "trials": 1024,
            "seed": 7,
            "output": "toyecct",
        },
        1024,
    )
    return TripletDataset(stem)
