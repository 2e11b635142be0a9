"""Configuration-driven Monte Carlo harness.

A JSON config describes one experiment: an outer code, an inner code, a
channel grid, a decoder chain, and trial/seed settings. The harness sweeps
the grid, accumulating bit and symbol error rates against the appropriate
reference (inner codeword for inner-only chains, outer codeword after BP).
Every trial derives its own counter-based RNG from (seed, trial index), so
results are byte-identical regardless of worker count.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from . import bcjr
from .bp import BpConfig, TannerGraph, bp_decode
from .channel import IdsChannelParams, make_rng, transmit, transmit_multi
from .features import (
    DatasetItem,
    build_ecct_features,
    build_multicopy_batch,
    build_state_window,
    build_symbol_window,
    export_dataset,
)
from .galois import GfParams, gf
from .inner_codes import (
    ConvCodeSpec,
    MarkerSpec,
    conv_encode,
    gen_offset,
    marker_encode,
    marker_positions_mask,
)
from .outer_codes import (
    LinearBlockCode,
    Protograph,
    builtin_code,
    lift_protograph,
    parse_alist,
)

CSV_COLUMNS = ["p", "p_sub", "m", "trials", "ber", "ser", "failures", "seed"]
RESULT_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending field."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"config field '{path}': {msg}")
        self.path = path


class RareEventError(RuntimeError):
    """A grid point produced too few errors to report at this trial count."""


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    q: int
    outer: dict
    inner: dict
    p_grid: tuple[float, ...]
    p_sub: float
    i_max: int
    copies: int
    chain: str  # bcjr | bcjr_joint | bcjr_conv
    use_bp: bool
    bp_iters: int
    m_cap: int
    trials: int
    seed: int
    drift_factor: float
    output: str
    fixed_codeword: str | None  # None | "zero" | "alternating" (histogram mode)

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError("<root>", f"not valid JSON: {e}") from e
        return ExperimentConfig.from_dict(raw)

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        def need(d: dict, key: str, path: str):
            if key not in d:
                raise ConfigError(f"{path}{key}", "missing")
            return d[key]

        name = raw.get("name", "experiment")
        q = raw.get("field", 2)
        if q not in (2, 4):
            raise ConfigError("field", f"unsupported field order {q}")
        outer = need(raw, "outer", "")
        inner = need(raw, "inner", "")
        if outer.get("type") not in ("alist", "builtin", "protograph", "random"):
            raise ConfigError("outer.type", f"unknown type {outer.get('type')!r}")
        if inner.get("type") not in ("marker", "conv"):
            raise ConfigError("inner.type", f"unknown type {inner.get('type')!r}")
        channel = need(raw, "channel", "")
        p_grid = tuple(float(p) for p in need(channel, "p", "channel."))
        if not p_grid:
            raise ConfigError("channel.p", "grid must be non-empty")
        for p in p_grid:
            if not 0.0 <= p < 0.5:
                raise ConfigError("channel.p", f"value {p} outside [0, 0.5)")
        p_sub = float(channel.get("p_sub", 0.0))
        if not 0.0 <= p_sub <= 1.0:
            raise ConfigError("channel.p_sub", f"value {p_sub} outside [0, 1]")
        i_max = int(channel.get("i_max", 2))
        if i_max < 0:
            raise ConfigError("channel.i_max", "must be non-negative")
        copies = int(raw.get("copies", 1))
        if copies < 1:
            raise ConfigError("copies", "must be >= 1")
        decoder = need(raw, "decoder", "")
        chain = need(decoder, "chain", "decoder.")
        if chain not in ("bcjr", "bcjr_joint", "bcjr_conv"):
            raise ConfigError("decoder.chain", f"unknown chain {chain!r}")
        if chain == "bcjr_conv" and inner["type"] != "conv":
            raise ConfigError("decoder.chain", "bcjr_conv requires a conv inner code")
        if chain != "bcjr_conv" and inner["type"] != "marker":
            raise ConfigError("decoder.chain", f"{chain} requires a marker inner code")
        if chain != "bcjr_joint" and copies != 1:
            raise ConfigError("copies", f"chain {chain} decodes a single copy")
        use_bp = bool(decoder.get("bp", False))
        if use_bp and outer["type"] == "random":
            raise ConfigError("decoder.bp", "BP needs a real outer code")
        trials = int(raw.get("trials", 409600))
        if trials < 1:
            raise ConfigError("trials", "must be >= 1")
        fixed = raw.get("fixed_codeword")
        if fixed not in (None, "zero", "alternating"):
            raise ConfigError("fixed_codeword", f"unknown value {fixed!r}")
        return ExperimentConfig(
            name=name,
            q=q,
            outer=outer,
            inner=inner,
            p_grid=p_grid,
            p_sub=p_sub,
            i_max=i_max,
            copies=copies,
            chain=chain,
            use_bp=use_bp,
            bp_iters=int(decoder.get("bp_iters", 50)),
            m_cap=int(decoder.get("m_cap", 3)),
            trials=trials,
            seed=int(raw.get("seed", 0)),
            drift_factor=float(raw.get("drift_factor", 5.0)),
            output=raw.get("output", name),
            fixed_codeword=fixed,
        )


@dataclass(frozen=True)
class ResultRow:
    p: float
    p_sub: float
    m: int
    trials: int
    ber: float
    ser: float
    failures: int
    wall_time_s: float
    seed: int
    error_bits: int
    total_bits: int


@dataclass
class _Setup:
    """Everything derivable from the config once, shared by all trials."""

    f: GfParams
    code: LinearBlockCode | None
    n_out: int
    marker: MarkerSpec | None
    conv: ConvCodeSpec | None
    n_in: int
    graph: TannerGraph | None
    marker_mask: NDArray[np.bool_] | None
    base_priors: NDArray[np.float64] | None


def build_setup(cfg: ExperimentConfig) -> _Setup:
    f = gf(1 if cfg.q == 2 else 2)
    code = None
    if cfg.outer["type"] == "alist":
        path = cfg.outer.get("path")
        if not path:
            raise ConfigError("outer.path", "missing")
        try:
            code = parse_alist(Path(path).read_text(), f)
        except FileNotFoundError as e:
            raise ConfigError("outer.path", f"cannot read {path}: {e}") from e
        n_out = code.n_out
    elif cfg.outer["type"] == "builtin":
        name = cfg.outer.get("name")
        if not name:
            raise ConfigError("outer.name", "missing")
        try:
            code = builtin_code(name, f)
        except ValueError as e:
            raise ConfigError("outer.name", str(e)) from e
        n_out = code.n_out
    elif cfg.outer["type"] == "protograph":
        proto = Protograph(np.asarray(cfg.outer["matrix"], dtype=np.int64))
        code = lift_protograph(
            proto, int(cfg.outer["lift"]), make_rng(int(cfg.outer.get("seed", 0))), f
        )
        n_out = code.n_out
    else:
        n_out = int(cfg.outer.get("n_out", 0))
        if n_out < 1:
            raise ConfigError("outer.n_out", "must be >= 1 for type random")

    marker = conv = None
    graph = marker_mask = base_priors = None
    if cfg.inner["type"] == "marker":
        marker = MarkerSpec.from_string(str(cfg.inner["marker"]), int(cfg.inner["interval"]))
        if (marker.marker >= f.q).any():
            raise ConfigError("inner.marker", f"symbols outside GF({f.q})")
        n_in = marker.inner_length(n_out)
        dummy, mpos = marker_encode(np.zeros(n_out, dtype=np.int8), marker)
        marker_mask = marker_positions_mask(n_in, mpos)
        base_priors = bcjr.marker_priors(n_in, f.q, mpos, dummy[mpos])
    else:
        if cfg.q != 2:
            raise ConfigError("inner.type", "conv inner codes are binary")
        conv = ConvCodeSpec(str(cfg.inner["polys"]))
        n_in = conv.inner_length(n_out)
    if code is not None and cfg.use_bp:
        graph = TannerGraph.from_code(code)
    return _Setup(
        f=f,
        code=code,
        n_out=n_out,
        marker=marker,
        conv=conv,
        n_in=n_in,
        graph=graph,
        marker_mask=marker_mask,
        base_priors=base_priors,
    )


def _bit_errors(a: NDArray[np.integer], b: NDArray[np.integer], p: int) -> int:
    x = np.bitwise_xor(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
    errs = 0
    for _ in range(p):
        errs += int((x & 1).sum())
        x >>= 1
    return errs


def _fixed_word(kind: str, n: int, q: int) -> NDArray[np.int8]:
    if kind == "zero":
        return np.zeros(n, dtype=np.int8)
    return (np.arange(n) % q).astype(np.int8)


def _marker_trial(
    cfg: ExperimentConfig,
    setup: _Setup,
    ch: IdsChannelParams,
    win: bcjr.DriftWindow,
    trial: int,
    exclude_markers: bool,
    per_position: NDArray[np.int64] | None = None,
):
    """One encode/transmit/decode round. Returns (bit_errs, sym_errs, n_bits, n_syms, failed)."""
    rng = make_rng(cfg.seed, trial)
    f = setup.f
    if cfg.fixed_codeword is not None:
        outer_word = _fixed_word(cfg.fixed_codeword, setup.n_out, f.q)
    elif setup.code is not None:
        msg = rng.integers(f.q, size=setup.code.k).astype(np.int8)
        outer_word = setup.code.encode(msg).astype(np.int8)
    else:
        outer_word = rng.integers(f.q, size=setup.n_out).astype(np.int8)
    inner_word, _ = marker_encode(outer_word, setup.marker)
    copies = transmit_multi(inner_word, ch, cfg.copies, rng, f)
    rs = [c[0] for c in copies]
    try:
        if cfg.chain == "bcjr_joint":
            post, _ = bcjr.bcjr_joint(rs, setup.base_priors, ch, win, m_cap=cfg.m_cap)
        else:
            post = bcjr.bcjr_marker(rs[0], setup.base_priors, ch, win)
    except (bcjr.OutOfWindowError, bcjr.UnderflowError):
        ref = outer_word if cfg.use_bp else inner_word
        if not cfg.use_bp and exclude_markers:
            ref = outer_word
        n_syms = len(ref)
        if per_position is not None:
            per_position += 1
        return n_syms * f.p, n_syms, n_syms * f.p, n_syms, True
    if cfg.use_bp:
        outer_post = post.probs[~setup.marker_mask]
        res = bp_decode(setup.code, outer_post, BpConfig(max_iters=cfg.bp_iters), setup.graph)
        hard, ref = res.hard, outer_word
    else:
        hard, ref = post.hard, inner_word
        if exclude_markers:
            hard, ref = hard[~setup.marker_mask], outer_word
    errs_pos = hard != ref
    if per_position is not None:
        per_position += errs_pos
    sym_errs = int(errs_pos.sum())
    bit_errs = _bit_errors(hard, ref, f.p)
    return bit_errs, sym_errs, len(ref) * f.p, len(ref), False


def _conv_trial(
    cfg: ExperimentConfig,
    setup: _Setup,
    ch: IdsChannelParams,
    win: bcjr.DriftWindow,
    trial: int,
):
    rng = make_rng(cfg.seed, trial)
    if setup.code is not None:
        msg = rng.integers(2, size=setup.code.k).astype(np.int8)
        outer_word = setup.code.encode(msg).astype(np.int8)
    else:
        outer_word = rng.integers(2, size=setup.n_out).astype(np.int8)
    offset = gen_offset(setup.n_in, int(rng.integers(2**63)))
    inner_word = conv_encode(outer_word, setup.conv, offset)
    rec, _ = transmit(inner_word, ch, rng, setup.f)
    try:
        post_bits, _ = bcjr.bcjr_conv(rec, setup.conv, offset, ch, win)
    except (bcjr.OutOfWindowError, bcjr.UnderflowError):
        n = setup.n_out
        return n, n, n, n, True
    hard = post_bits.hard[: setup.n_out]
    if cfg.use_bp:
        soft = post_bits.probs[: setup.n_out]
        res = bp_decode(setup.code, soft, BpConfig(max_iters=cfg.bp_iters), setup.graph)
        hard = res.hard
    errs = int((hard != outer_word).sum())
    return errs, errs, setup.n_out, setup.n_out, False


def run_experiment(
    cfg: ExperimentConfig,
    trials: int | None = None,
    seed: int | None = None,
    threads: int = 1,
    allow_rare: bool = False,
    exclude_markers: bool = False,
) -> list[ResultRow]:
    """Sweep the channel grid; returns one row per grid point.

    Grid points whose observed error count is below 10 are refused unless
    allow_rare is set (their statistics would be noise).
    """
    if trials is not None or seed is not None:
        cfg = ExperimentConfig(
            **{
                **cfg.__dict__,
                "trials": trials if trials is not None else cfg.trials,
                "seed": seed if seed is not None else cfg.seed,
            }
        )
    if exclude_markers and (cfg.inner["type"] != "marker" or cfg.use_bp):
        raise ConfigError("exclude_markers", "only applies to inner-only marker chains")
    setup = build_setup(cfg)
    rows: list[ResultRow] = []
    for p in cfg.p_grid:
        ch = IdsChannelParams(p_ins=p, p_del=p, p_sub=cfg.p_sub, i_max=cfg.i_max)
        win = bcjr.drift_bound(setup.n_in, p, cfg.drift_factor)
        t0 = time.perf_counter()
        bit_errs = np.zeros(cfg.trials, dtype=np.int64)
        sym_errs = np.zeros(cfg.trials, dtype=np.int64)
        bits = np.zeros(cfg.trials, dtype=np.int64)
        syms = np.zeros(cfg.trials, dtype=np.int64)
        fails = np.zeros(cfg.trials, dtype=np.int64)

        def worker(lo: int, hi: int):
            for t in range(lo, hi):
                if cfg.chain == "bcjr_conv":
                    out = _conv_trial(cfg, setup, ch, win, t)
                else:
                    out = _marker_trial(cfg, setup, ch, win, t, exclude_markers)
                bit_errs[t], sym_errs[t], bits[t], syms[t], fails[t] = out

        if threads <= 1:
            worker(0, cfg.trials)
        else:
            chunk = -(-cfg.trials // threads)
            bounds = [(i * chunk, min((i + 1) * chunk, cfg.trials)) for i in range(threads)]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(lambda b: worker(*b), [b for b in bounds if b[0] < b[1]]))
        wall = time.perf_counter() - t0
        total_errs = int(sym_errs.sum())
        if total_errs < 10 and not allow_rare:
            raise RareEventError(
                f"grid point p={p}: only {total_errs} symbol errors in {cfg.trials} "
                f"trials; increase trials or pass allow_rare"
            )
        rows.append(
            ResultRow(
                p=p,
                p_sub=cfg.p_sub,
                m=cfg.copies,
                trials=cfg.trials,
                ber=float(bit_errs.sum() / bits.sum()),
                ser=float(sym_errs.sum() / syms.sum()),
                failures=int(fails.sum()),
                wall_time_s=wall,
                seed=cfg.seed,
                error_bits=int(bit_errs.sum()),
                total_bits=int(bits.sum()),
            )
        )
    return rows


def rows_to_csv(rows: list[ResultRow]) -> str:
    """Stable, versioned CSV rendering (no wall time, for byte-identical replays)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(
            [
                repr(r.p),
                repr(r.p_sub),
                r.m,
                r.trials,
                repr(r.ber),
                repr(r.ser),
                r.failures,
                r.seed,
            ]
        )
    return buf.getvalue()


def rows_to_json(rows: list[ResultRow], cfg: ExperimentConfig) -> str:
    payload = {
        "schema_version": RESULT_SCHEMA_VERSION,
        "config": cfg.__dict__ | {"p_grid": list(cfg.p_grid)},
        "rows": [r.__dict__ for r in rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"


def write_report(rows: list[ResultRow], cfg: ExperimentConfig, out_stem: str | Path) -> list[Path]:
    """Write CSV + JSON and render the BER curve alongside them."""
    out_stem = Path(out_stem)
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    paths = [out_stem.with_suffix(".csv"), out_stem.with_suffix(".json")]
    paths[0].write_text(rows_to_csv(rows))
    paths[1].write_text(rows_to_json(rows, cfg))
    fig_path = render_figure(rows, cfg, out_stem.with_suffix(".png"))
    if fig_path is not None:
        paths.append(fig_path)
    return paths


def render_figure(
    rows: list[ResultRow], cfg: ExperimentConfig, path: Path
) -> Path | None:
    """BER/SER vs p on log axes; skipped when no positive rates exist."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ps = [r.p for r in rows]
    bers = [r.ber for r in rows]
    sers = [r.ser for r in rows]
    if not any(b > 0 for b in bers):
        return None
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(ps, bers, "o-", label="BER")
    if sers != bers:
        ax.plot(ps, sers, "s--", label="SER")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("$p_I = p_D$")
    ax.set_ylabel("error rate")
    ax.set_title(cfg.name)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def per_position_histogram(
    cfg: ExperimentConfig, trials: int | None = None
) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """Per-inner-position SER for a fixed codeword, plus marker distances.

    Requires fixed_codeword in the config and a single grid point.
    """
    if cfg.fixed_codeword is None:
        raise ConfigError("fixed_codeword", "histogram mode needs a fixed codeword")
    if cfg.inner["type"] != "marker" or cfg.use_bp or cfg.chain != "bcjr":
        raise ConfigError("decoder.chain", "histogram mode uses the plain bcjr chain")
    if len(cfg.p_grid) != 1:
        raise ConfigError("channel.p", "histogram mode expects a single grid point")
    n_trials = trials if trials is not None else cfg.trials
    setup = build_setup(cfg)
    p = cfg.p_grid[0]
    ch = IdsChannelParams(p_ins=p, p_del=p, p_sub=cfg.p_sub, i_max=cfg.i_max)
    win = bcjr.drift_bound(setup.n_in, p, cfg.drift_factor)
    counts = np.zeros(setup.n_in, dtype=np.int64)
    for t in range(n_trials):
        _marker_trial(cfg, setup, ch, win, t, False, per_position=counts)
    marker_idx = np.nonzero(setup.marker_mask)[0]
    dist = np.array(
        [int(np.abs(marker_idx - i).min()) for i in range(setup.n_in)], dtype=np.int64
    )
    return counts / n_trials, dist


def generate_training_set(
    cfg: ExperimentConfig,
    out_stem: str | Path,
    count: int | None = None,
    variant: str = "auto",
) -> dict:
    """Run the pipeline up to feature construction and export a dataset.

    Variants: "window" (marker symbol windows, inner-bit targets), "conv"
    (symbol + state windows, concatenated inner/outer/termination targets),
    "ecct" (magnitude + syndrome features, multiplicative-noise targets).
    "auto" picks conv for conv inner codes, else ecct when BP-style outer
    decoding is configured with a code, else window.
    """
    if variant == "auto":
        if cfg.inner["type"] == "conv":
            variant = "conv"
        elif cfg.use_bp:
            variant = "ecct"
        else:
            variant = "window"
    if variant not in ("window", "conv", "ecct"):
        raise ConfigError("variant", f"unknown dataset variant {variant!r}")
    if len(cfg.p_grid) != 1:
        raise ConfigError("channel.p", "dataset generation expects a single grid point")
    n_items = count if count is not None else cfg.trials
    setup = build_setup(cfg)
    p = cfg.p_grid[0]
    ch = IdsChannelParams(p_ins=p, p_del=p, p_sub=cfg.p_sub, i_max=cfg.i_max)
    win = bcjr.drift_bound(setup.n_in, p, cfg.drift_factor)
    f = setup.f

    def items():
        for t in range(n_items):
            rng = make_rng(cfg.seed, t)
            if setup.code is not None:
                msg = rng.integers(f.q, size=setup.code.k).astype(np.int8)
                outer_word = setup.code.encode(msg).astype(np.int8)
            else:
                outer_word = rng.integers(f.q, size=setup.n_out).astype(np.int8)
            if variant == "conv":
                offset = gen_offset(setup.n_in, int(rng.integers(2**63)))
                inner_word = conv_encode(outer_word, setup.conv, offset)
                rec, _ = transmit(inner_word, ch, rng, f)
                uni = np.full((setup.n_in, 2), 0.5)
                symb = build_symbol_window(rec, uni, ch, win)
                state = build_state_window(rec, setup.conv, offset, ch, win)
                width = max(symb.tokens.shape[1], state.tokens.shape[1])
                feats = np.zeros(
                    (setup.n_in + state.tokens.shape[0], width), dtype=np.float32
                )
                feats[: setup.n_in, : symb.tokens.shape[1]] = symb.tokens
                feats[setup.n_in :, : state.tokens.shape[1]] = state.tokens
                target = np.concatenate(
                    [inner_word, outer_word, np.zeros(setup.conv.memory, dtype=np.int8)]
                ).astype(np.uint8)
                yield DatasetItem(features=feats, target=target)
                continue
            inner_word, _ = marker_encode(outer_word, setup.marker)
            copies = transmit_multi(inner_word, ch, cfg.copies, rng, f)
            rs = [c[0] for c in copies]
            if variant == "window":
                tensors = [build_symbol_window(r, setup.base_priors, ch, win) for r in rs]
                batch = build_multicopy_batch(tensors, cfg.copies)
                yield DatasetItem(
                    features=batch.tokens.astype(np.float32),
                    target=np.asarray(inner_word, dtype=np.uint8),
                )
            else:  # ecct
                try:
                    post = bcjr.bcjr_marker(rs[0], setup.base_priors, ch, win)
                    outer_post = post.probs[~setup.marker_mask]
                except (bcjr.OutOfWindowError, bcjr.UnderflowError):
                    outer_post = np.full((setup.n_out, f.q), 1.0 / f.q)
                ecct = build_ecct_features(setup.code, outer_post, outer_word)
                feats = np.concatenate([ecct.magnitude, ecct.syndrome_bipolar])
                yield DatasetItem(
                    features=feats.reshape(-1, 1).astype(np.float32),
                    target=ecct.target_noise,
                )

    delta = win.width
    meta = {
        "variant": variant,
        "q": cfg.q,
        "n_in": setup.n_in,
        "n_out": setup.n_out,
        "outer_k": setup.code.k if setup.code is not None else None,
        "copies": cfg.copies,
        "channel": {"p_ins": p, "p_del": p, "p_sub": cfg.p_sub, "i_max": cfg.i_max},
        "window": {"d_min": win.d_min, "d_max": win.d_max, "delta": delta},
        "seed": cfg.seed,
        "code_id": cfg.outer.get("path")
        or cfg.outer.get("name")
        or cfg.outer.get("matrix")
        or "random",
        "inner": cfg.inner,
    }
    if variant == "ecct":
        # the consumer needs the parity-check support to build its
        # attention mask and size its readout
        meta["ecct"] = {"pcm": setup.code.pcm.tolist()}
    if variant == "conv":
        meta["conv"] = {
            "polys": cfg.inner["polys"],
            "n_c": setup.conv.n_c,
            "memory": setup.conv.memory,
            "symbol_width": delta * 2,
            "state_width": delta * (1 << setup.conv.n_c),
            "symbol_tokens": setup.n_in,
            "state_tokens": setup.n_in // setup.conv.n_c,
        }
    return export_dataset(items(), out_stem, meta)
