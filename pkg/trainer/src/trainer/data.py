"""Loader for the dataset triplet format (manifest + feat.bin + tgt.bin).

This is the only interface to the core library: three files per set, with
the manifest pinning shapes, dtypes, and the feature flattening order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch


class TripletDataset:
    """An exported dataset held in memory as torch tensors.

    Attributes:
        manifest: The parsed manifest dictionary.
        features: Float tensor of shape (count, *feature_shape).
        targets: Float tensor of shape (count, *target_shape).
    """

    def __init__(self, stem: str | Path) -> None:
        stem = Path(stem)
        with open(f"{stem}.manifest.json") as fh:
            self.manifest = json.load(fh)
        if self.manifest.get("version") != 1:
            raise ValueError("unsupported dataset version")
        count = self.manifest["count"]
        fshape = tuple(self.manifest["feature_shape"])
        tshape = tuple(self.manifest["target_shape"])
        feats = np.fromfile(f"{stem}.feat.bin", dtype="<f4")
        tgts = np.fromfile(f"{stem}.tgt.bin", dtype=np.uint8)
        if feats.size != count * int(np.prod(fshape)):
            raise ValueError("feature file size does not match manifest")
        if tgts.size != count * int(np.prod(tshape)):
            raise ValueError("target file size does not match manifest")
        self.features = torch.from_numpy(feats.reshape(count, *fshape).copy())
        self.targets = torch.from_numpy(tgts.reshape(count, *tshape).copy()).float()

    def __len__(self) -> int:
        return self.features.shape[0]

    def batches(self, batch_size: int, iterations: int, seed: int):
        """Yields (features, targets) batches sampled with replacement."""
        gen = torch.Generator().manual_seed(seed)
        n = len(self)
        for _ in range(iterations):
            idx = torch.randint(n, (min(batch_size, n),), generator=gen)
            yield self.features[idx], self.targets[idx]
