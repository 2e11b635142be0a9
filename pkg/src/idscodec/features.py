"""Transformer inputs, masks, and targets for the neural decoders.

Every constructor is a pure function of decoder-visible quantities. Window
entries are probabilities (or probability products) in [0, 1]; positions
the drift window pushes outside the received sequence are padded with the
maximal-uncertainty value so padding is indistinguishable from a total lack
of evidence: 1/q per symbol slot, 1/N_zeta per state slot.

Feature rows flatten in drift-major, symbol-minor order: the feature index
of (drift index j, symbol xi) is j*q + xi. The dataset serializer records
this layout in the manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
from numpy.typing import NDArray

from .bcjr import DriftWindow, PosteriorMatrix
from .channel import IdsChannelParams, ReceivedSeq
from .galois import GfParams
from .inner_codes import ConvCodeSpec, OffsetSeq, conv_generator_matrix
from .outer_codes import LinearBlockCode

DATASET_VERSION = 1


@dataclass(frozen=True)
class FeatureTensor:
    tokens: NDArray[np.float64]  # (T, F)
    layout: dict
    pad_value: float

    def __post_init__(self):
        if self.tokens.ndim != 2:
            raise ValueError(f"tokens must be 2-D, got shape {self.tokens.shape}")


@dataclass(frozen=True)
class AttentionMask:
    allowed: NDArray[np.bool_]  # true = attention permitted


@dataclass(frozen=True)
class MultiCopyBatch:
    tokens: NDArray[np.float64]  # (m_max * n, F)
    positions: NDArray[np.int64]  # position within the copy, per token row
    copy_index: NDArray[np.int64]  # copy id per token row
    pad_flags: NDArray[np.bool_]  # true = padded row
    m_k: int
    m_max: int


@dataclass(frozen=True)
class EcctFeatures:
    x_phi: NDArray[np.float64]
    magnitude: NDArray[np.float64]
    syndrome_bipolar: NDArray[np.float64]
    target_noise: NDArray[np.uint8] | None


def _f_factor(q: int, p_sub: float, xi: int, rv: int) -> float:
    return 1.0 - p_sub if xi == rv else p_sub / (q - 1)


def build_symbol_window(
    r: ReceivedSeq,
    priors: NDArray[np.float64],
    ch: IdsChannelParams,
    win: DriftWindow,
    drop_emission_factor: bool = False,
) -> FeatureTensor:
    """Y_{i,j,xi} = P(x_i = xi) * F(xi, r_{i+d_j}), padded with 1/q off-range.

    `drop_emission_factor` reproduces the alternative reading where in-range
    entries carry the prior alone (no F), for ablation.
    """
    n, q = priors.shape
    delta = win.width
    out = np.full((n, delta * q), 1.0 / q)
    for i in range(1, n + 1):
        for j in range(delta):
            pos = i + win.d_min + j  # 1-based received index
            if not 1 <= pos <= r.n_rec:
                continue
            rv = r.symbols[pos - 1]
            for xi in range(q):
                v = priors[i - 1, xi]
                if not drop_emission_factor:
                    v *= _f_factor(q, ch.p_sub, xi, rv)
                out[i - 1, j * q + xi] = v
    layout = {
        "kind": "symbol_window",
        "axes": ["position", "drift", "symbol"],
        "delta": delta,
        "q": q,
        "d_min": win.d_min,
    }
    return FeatureTensor(tokens=out, layout=layout, pad_value=1.0 / q)


def build_aggregated_window(
    r: ReceivedSeq,
    priors: NDArray[np.float64],
    ch: IdsChannelParams,
    win: DriftWindow,
) -> FeatureTensor:
    """Binary-only aggregated window: the symbol window summed over xi."""
    n, q = priors.shape
    if q != 2:
        raise ValueError(f"aggregated window is defined for q=2 only, got q={q}")
    sym = build_symbol_window(r, priors, ch, win)
    out = sym.tokens.reshape(n, win.width, q).sum(axis=2)
    layout = {
        "kind": "aggregated_window",
        "axes": ["position", "drift"],
        "delta": win.width,
        "q": q,
        "d_min": win.d_min,
    }
    return FeatureTensor(tokens=out, layout=layout, pad_value=1.0)


def build_state_window(
    r: ReceivedSeq,
    spec: ConvCodeSpec,
    offset: OffsetSeq,
    ch: IdsChannelParams,
    win: DriftWindow,
) -> FeatureTensor:
    """Y^state_{i,j,zeta} = (1/N_zeta) * prod_l F(zeta_l, r[...] xor o[...])."""
    n_in = len(offset)
    b_sections = n_in // spec.n_c
    n_c = spec.n_c
    n_zeta = 1 << n_c
    delta = win.width
    out = np.full((b_sections, delta * n_zeta), 1.0 / n_zeta)
    for i in range(1, b_sections + 1):
        for j in range(delta):
            d = win.d_min + j
            vals = np.empty(n_c, dtype=np.int64)
            ok = True
            for l in range(1, n_c + 1):
                idx = n_c * (i - 1) + l + d  # 1-based shifted index into r and o
                if not 1 <= idx <= min(r.n_rec, n_in):
                    ok = False
                    break
                vals[l - 1] = r.symbols[idx - 1] ^ offset.bits[idx - 1]
            if not ok:
                continue
            for zeta in range(n_zeta):
                prod = 1.0 / n_zeta
                for l in range(n_c):
                    zl = (zeta >> (n_c - 1 - l)) & 1
                    prod *= 1.0 - ch.p_sub if zl == vals[l] else ch.p_sub
                out[i - 1, j * n_zeta + zeta] = prod
    layout = {
        "kind": "state_window",
        "axes": ["position", "drift", "state_output"],
        "delta": delta,
        "n_zeta": n_zeta,
        "d_min": win.d_min,
        "zeta_bit_order": "first coded bit is the most significant bit",
    }
    return FeatureTensor(tokens=out, layout=layout, pad_value=1.0 / n_zeta)


def build_cross_masks(spec: ConvCodeSpec, n_msg: int) -> tuple[AttentionMask, AttentionMask]:
    """Supports of G^T (codeword queries -> message keys) and of G."""
    g = conv_generator_matrix(spec, n_msg) != 0
    return AttentionMask(allowed=g.T.copy()), AttentionMask(allowed=g.copy())


def build_multicopy_batch(tensors: list[FeatureTensor], m_max: int) -> MultiCopyBatch:
    """Concatenate per-copy windows along tokens; pad up to m_max copies."""
    m_k = len(tensors)
    if m_k < 1:
        raise ValueError("need at least one copy")
    if m_k > m_max:
        raise ValueError(f"M_k={m_k} exceeds m_max={m_max}")
    n, width = tensors[0].tokens.shape
    for t in tensors[1:]:
        if t.tokens.shape != (n, width):
            raise ValueError("all copies must share token count and feature width")
    pad_rows = (m_max - m_k) * n
    tokens = np.vstack(
        [t.tokens for t in tensors]
        + ([np.full((pad_rows, width), tensors[0].pad_value)] if pad_rows else [])
    )
    total = m_max * n
    positions = np.tile(np.arange(n, dtype=np.int64), m_max)
    copy_index = np.repeat(np.arange(m_max, dtype=np.int64), n)
    pad_flags = np.zeros(total, dtype=bool)
    pad_flags[m_k * n :] = True
    return MultiCopyBatch(
        tokens=tokens,
        positions=positions,
        copy_index=copy_index,
        pad_flags=pad_flags,
        m_k=m_k,
        m_max=m_max,
    )


def _phi(bits: NDArray[np.integer]) -> NDArray[np.float64]:
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def _bin(vals: NDArray[np.float64]) -> NDArray[np.uint8]:
    # sign(0) treated as +1 so ties decide the bit 0
    return (np.asarray(vals) < 0).astype(np.uint8)


def build_ecct_features(
    code: LinearBlockCode,
    inner_posteriors: PosteriorMatrix | NDArray[np.float64],
    true_outer: NDArray[np.integer] | None = None,
) -> EcctFeatures:
    """Magnitude/syndrome input pair and the multiplicative-noise target.

    The soft bipolar estimate is x_phi = 2*P(x=0) - 1, so its sign is the
    hard decision and its magnitude the confidence.
    """
    if code.field.q != 2:
        raise ValueError("ECCT features are defined for binary codes only")
    probs = (
        inner_posteriors.probs
        if isinstance(inner_posteriors, PosteriorMatrix)
        else inner_posteriors
    )
    if probs.shape != (code.n_out, 2):
        raise ValueError(f"posterior shape {probs.shape} != ({code.n_out}, 2)")
    x_phi = 2.0 * probs[:, 0] - 1.0
    magnitude = np.abs(x_phi)
    hard = _bin(x_phi)
    syndrome_bipolar = _phi(code.syndrome(hard))
    target = None
    if true_outer is not None:
        if len(true_outer) != code.n_out:
            raise ValueError(f"true_outer length {len(true_outer)} != {code.n_out}")
        target = _bin(x_phi * _phi(true_outer))
    return EcctFeatures(
        x_phi=x_phi,
        magnitude=magnitude,
        syndrome_bipolar=syndrome_bipolar,
        target_noise=target,
    )


def apply_ecct_output(z_hat: NDArray[np.float64], x_phi: NDArray[np.float64]) -> NDArray[np.uint8]:
    """x_hat = bin(-z_hat * sign(x_phi))."""
    if len(z_hat) != len(x_phi):
        raise ValueError(f"length mismatch: {len(z_hat)} vs {len(x_phi)}")
    sign = np.where(np.asarray(x_phi) < 0, -1.0, 1.0)
    return _bin(-np.asarray(z_hat) * sign)


@dataclass(frozen=True)
class DatasetItem:
    features: NDArray[np.float32]  # (T, F)
    target: NDArray[np.uint8]  # flat byte vector


def export_dataset(items: Iterable[DatasetItem], stem: str | Path, meta: dict) -> dict:
    """Write <stem>.manifest.json, <stem>.feat.bin, <stem>.tgt.bin.

    Features are stored row-major as little-endian float32, targets as raw
    bytes; all items must share shapes. Returns the manifest written.
    """
    stem = Path(stem)
    feat_shape = None
    tgt_len = None
    count = 0
    with open(f"{stem}.feat.bin", "wb") as ffeat, open(f"{stem}.tgt.bin", "wb") as ftgt:
        for item in items:
            feats = np.ascontiguousarray(item.features, dtype="<f4")
            tgt = np.ascontiguousarray(item.target, dtype=np.uint8)
            if feat_shape is None:
                feat_shape = feats.shape
                tgt_len = tgt.shape
            if feats.shape != feat_shape or tgt.shape != tgt_len:
                raise ValueError(
                    f"heterogeneous item shapes: {feats.shape}/{tgt.shape} "
                    f"vs {feat_shape}/{tgt_len}"
                )
            ffeat.write(feats.tobytes())
            ftgt.write(tgt.tobytes())
            count += 1
    if feat_shape is None:
        raise ValueError("empty dataset")
    manifest = {
        "version": DATASET_VERSION,
        "count": count,
        "feature_shape": list(feat_shape),
        "feature_dtype": "<f4",
        "feature_order": "row-major",
        "target_shape": list(tgt_len),
        "target_dtype": "u1",
        "flatten_order": "drift-major, symbol-minor",
        **meta,
    }
    with open(f"{stem}.manifest.json", "w") as fman:
        json.dump(manifest, fman, indent=2, sort_keys=True)
        fman.write("\n")
    return manifest


def load_dataset(stem: str | Path) -> tuple[dict, Iterator[DatasetItem]]:
    """Read a dataset triplet; yields items lazily in written order."""
    stem = Path(stem)
    with open(f"{stem}.manifest.json") as fman:
        manifest = json.load(fman)
    if "version" not in manifest:
        raise ValueError("manifest missing mandatory version field")
    feat_shape = tuple(manifest["feature_shape"])
    tgt_shape = tuple(manifest["target_shape"])
    count = manifest["count"]

    def _iter() -> Iterator[DatasetItem]:
        feat_bytes = int(np.prod(feat_shape)) * 4
        tgt_bytes = int(np.prod(tgt_shape))
        with open(f"{stem}.feat.bin", "rb") as ffeat, open(f"{stem}.tgt.bin", "rb") as ftgt:
            for _ in range(count):
                feats = np.frombuffer(ffeat.read(feat_bytes), dtype="<f4").reshape(feat_shape)
                tgt = np.frombuffer(ftgt.read(tgt_bytes), dtype=np.uint8).reshape(tgt_shape)
                yield DatasetItem(features=feats, target=tgt)

    return manifest, _iter()
