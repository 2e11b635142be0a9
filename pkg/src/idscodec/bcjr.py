"""Exact MAP symbol posteriors over the IDS channel.

All three decoders share one event class per consumed input symbol: up to
i_max insertions, each weighted p_ins/q, followed by either a deletion
(weight p_del) or a transmission (weight p_trans times the emission factor
F). The drift d is the running surplus of emitted over consumed symbols;
the forward/backward recursions run over a bounded drift window in the
linear domain with per-step renormalization.

`bcjr_marker` decodes a single copy, `bcjr_joint` runs the product trellis
over the drift tuples of M copies of one codeword, and `bcjr_conv` runs the
joint (convolutional state x drift) trellis of a zero-terminated offset
convolutional code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from numpy.typing import NDArray

from .channel import IdsChannelParams, ReceivedSeq
from .galois import GfParams
from .inner_codes import ConvCodeSpec, OffsetSeq


class OutOfWindowError(RuntimeError):
    """Received-sequence drift falls outside the configured window."""


class UnderflowError(RuntimeError):
    """All trellis paths vanished; the received sequence has zero probability."""


class ComplexityError(RuntimeError):
    """Requested joint decode exceeds the configured copy cap."""


@dataclass(frozen=True)
class DriftWindow:
    d_min: int
    d_max: int

    def __post_init__(self):
        if not self.d_min <= 0 <= self.d_max:
            raise ValueError(f"window [{self.d_min}, {self.d_max}] must contain drift 0")

    @property
    def width(self) -> int:
        return self.d_max - self.d_min + 1

    def contains(self, drift: int) -> bool:
        return self.d_min <= drift <= self.d_max


def drift_bound(n_in: int, p_del: float, factor: float = 5.0) -> DriftWindow:
    """Symmetric window of +-ceil(factor * sqrt(n_in * p_del / (1 - p_del)))."""
    if not 0.0 <= p_del < 1.0:
        raise ValueError(f"p_del={p_del} outside [0, 1)")
    d_max = math.ceil(factor * math.sqrt(n_in * p_del / (1.0 - p_del)))
    return DriftWindow(d_min=-d_max, d_max=d_max)


@dataclass(frozen=True)
class PosteriorMatrix:
    probs: NDArray[np.float64]

    def __post_init__(self):
        rows = self.probs.sum(axis=1)
        if (self.probs < 0).any() or np.abs(rows - 1.0).max() > 1e-9:
            raise ValueError("posterior rows must be non-negative and sum to 1")

    @property
    def hard(self) -> NDArray[np.int8]:
        return self.probs.argmax(axis=1).astype(np.int8)


@dataclass(frozen=True)
class JointDecodeInfo:
    """Structural complexity report: drift states touched by the product trellis."""

    n_in: int
    delta: int
    m: int

    @property
    def state_count(self) -> int:
        return self.n_in * self.delta**self.m


_OK = 0
_ERR_UNDERFLOW = 1


@njit(cache=True)
def _marker_fb(r, priors, p_ins, p_del, p_sub, i_max, d_min, d_max):
    n, q = priors.shape
    n_rec = r.shape[0]
    delta = d_max - d_min + 1
    p_t = 1.0 - p_ins - p_del
    piq = p_ins / q
    f_match = 1.0 - p_sub
    f_miss = p_sub / (q - 1)

    alpha = np.zeros((n + 1, delta))
    alpha[0, -d_min] = 1.0
    for i in range(1, n + 1):
        tot = 0.0
        for jp in range(delta):
            dp = d_min + jp
            pos = i + dp  # 1-based position of the transmit emission
            et = 0.0
            if 1 <= pos <= n_rec:
                rv = r[pos - 1]
                for xi in range(q):
                    et += priors[i - 1, xi] * (f_match if xi == rv else f_miss)
            acc = 0.0
            w = 1.0
            for t in range(i_max + 1):
                if t == 0 or (pos <= n_rec and pos + 1 - t >= 1):
                    jq = dp + 1 - t - d_min
                    if 0 <= jq < delta:
                        acc += w * p_del * alpha[i - 1, jq]
                if 1 <= pos <= n_rec and pos - t >= 1:
                    jq = dp - t - d_min
                    if 0 <= jq < delta:
                        acc += w * p_t * et * alpha[i - 1, jq]
                w *= piq
            alpha[i, jp] = acc
            tot += acc
        if tot <= 0.0:
            return alpha, alpha, _ERR_UNDERFLOW
        for jp in range(delta):
            alpha[i, jp] /= tot

    beta = np.zeros((n + 1, delta))
    jf = n_rec - n - d_min
    beta[n, jf] = 1.0
    for i in range(n - 1, -1, -1):
        tot = 0.0
        for j in range(delta):
            d = d_min + j
            acc = 0.0
            w = 1.0
            for t in range(i_max + 1):
                # step i+1 insertions emit at 1-based positions i+d+1 .. i+d+t
                ins_ok = t == 0 or (i + d + 1 >= 1 and i + d + t <= n_rec)
                if ins_ok:
                    jq = d + t - 1 - d_min
                    if 0 <= jq < delta:
                        acc += w * p_del * beta[i + 1, jq]
                    pos = i + 1 + d + t
                    jq = d + t - d_min
                    if 1 <= pos <= n_rec and 0 <= jq < delta:
                        rv = r[pos - 1]
                        et = 0.0
                        for xi in range(q):
                            et += priors[i, xi] * (f_match if xi == rv else f_miss)
                        acc += w * p_t * et * beta[i + 1, jq]
                w *= piq
            beta[i, j] = acc
            tot += acc
        if tot <= 0.0:
            return alpha, beta, _ERR_UNDERFLOW
        for j in range(delta):
            beta[i, j] /= tot

    post = np.zeros((n, q))
    for i in range(1, n + 1):
        for j in range(delta):
            a = alpha[i - 1, j]
            if a == 0.0:
                continue
            d = d_min + j
            w = 1.0
            for t in range(i_max + 1):
                # step i insertions at positions i+d .. i+d+t-1
                ins_ok = t == 0 or (i + d >= 1 and i + d + t - 1 <= n_rec)
                if ins_ok:
                    jq = d + t - 1 - d_min
                    if 0 <= jq < delta:
                        bdel = w * p_del * beta[i, jq]
                        if bdel > 0.0:
                            for xi in range(q):
                                post[i - 1, xi] += a * priors[i - 1, xi] * bdel
                    pos = i + d + t
                    jq = d + t - d_min
                    if 1 <= pos <= n_rec and 0 <= jq < delta:
                        btr = w * p_t * beta[i, jq]
                        if btr > 0.0:
                            rv = r[pos - 1]
                            for xi in range(q):
                                fv = f_match if xi == rv else f_miss
                                post[i - 1, xi] += a * priors[i - 1, xi] * fv * btr
                w *= piq
        tot = 0.0
        for xi in range(q):
            tot += post[i - 1, xi]
        if tot <= 0.0:
            return alpha, beta, _ERR_UNDERFLOW
        for xi in range(q):
            post[i - 1, xi] /= tot
    return post, beta, _OK


def _check_inputs(r: ReceivedSeq, priors: np.ndarray, win: DriftWindow) -> None:
    n = r.source_len
    if priors.shape[0] != n:
        raise ValueError(f"priors have {priors.shape[0]} rows, expected {n}")
    if np.abs(priors.sum(axis=1) - 1.0).max() > 1e-9:
        raise ValueError("prior rows must sum to 1")
    if not win.contains(r.drift):
        raise OutOfWindowError(
            f"received drift {r.drift} outside window [{win.d_min}, {win.d_max}]"
        )


def bcjr_marker(
    r: ReceivedSeq,
    priors: NDArray[np.float64],
    ch: IdsChannelParams,
    win: DriftWindow,
) -> PosteriorMatrix:
    """Single-copy MAP symbol posteriors P(x_i = xi | r)."""
    _check_inputs(r, priors, win)
    q = priors.shape[1]
    post, _, status = _marker_fb(
        r.symbols,
        np.ascontiguousarray(priors, dtype=np.float64),
        ch.p_ins,
        ch.p_del,
        ch.p_sub if q > 1 else 0.0,
        ch.i_max,
        win.d_min,
        win.d_max,
    )
    if status == _ERR_UNDERFLOW:
        raise UnderflowError("received sequence has zero probability under the model")
    return PosteriorMatrix(probs=post)


@njit(cache=True)
def _joint_fb(rs, n_recs, priors, p_ins, p_del, p_sub, i_max, d_min, d_max):
    """Forward-backward on the product drift trellis of M copies.

    rs is an (M, max_n_rec) padded matrix; n_recs gives true lengths.
    """
    n, q = priors.shape
    m = rs.shape[0]
    delta = d_max - d_min + 1
    p_t = 1.0 - p_ins - p_del
    piq = p_ins / q
    f_match = 1.0 - p_sub
    f_miss = p_sub / (q - 1)

    n_states = delta**m
    n_moves = (i_max + 2) ** m  # per-copy drift increment in [-1, i_max]

    digits = np.empty((n_states, m), dtype=np.int64)
    for s in range(n_states):
        v = s
        for k in range(m - 1, -1, -1):
            digits[s, k] = v % delta
            v //= delta
    moves = np.empty((n_moves, m), dtype=np.int64)
    for s in range(n_moves):
        v = s
        for k in range(m - 1, -1, -1):
            moves[s, k] = v % (i_max + 2) - 1  # u in [-1, i_max]
            v //= i_max + 2

    # per-copy branch coefficients for step i, successor drift dp, increment u:
    #   weight(xi) = a + b * F(xi, r_k[i + dp])
    def_shape = (m,)
    a_buf = np.empty(def_shape)
    b_buf = np.empty(def_shape)
    rv_buf = np.empty(def_shape, dtype=np.int64)

    alpha = np.zeros((n + 1, n_states))
    s0 = 0
    for k in range(m):
        s0 = s0 * delta + (-d_min)
    alpha[0, s0] = 1.0

    for i in range(1, n + 1):
        tot = 0.0
        for sp in range(n_states):
            acc = 0.0
            for mv in range(n_moves):
                # predecessor drift per copy
                spred = 0
                valid = True
                for k in range(m):
                    jq = digits[sp, k] - moves[mv, k]
                    if jq < 0 or jq >= delta:
                        valid = False
                        break
                    spred = spred * delta + jq
                if not valid:
                    continue
                apred = alpha[i - 1, spred]
                if apred == 0.0:
                    continue
                for k in range(m):
                    dp = d_min + digits[sp, k]
                    u = moves[mv, k]
                    pos = i + dp
                    nr = n_recs[k]
                    t_del = u + 1
                    a = 0.0
                    if 0 <= t_del <= i_max and (
                        t_del == 0 or (pos <= nr and pos + 1 - t_del >= 1)
                    ):
                        a = piq**t_del * p_del
                    b = 0.0
                    rv = -1
                    if 0 <= u <= i_max and 1 <= pos <= nr and pos - u >= 1:
                        b = piq**u * p_t
                        rv = rs[k, pos - 1]
                    a_buf[k] = a
                    b_buf[k] = b
                    rv_buf[k] = rv
                ws = 0.0
                for xi in range(q):
                    prod = priors[i - 1, xi]
                    for k in range(m):
                        fv = f_match if xi == rv_buf[k] else f_miss
                        prod *= a_buf[k] + b_buf[k] * fv
                        if prod == 0.0:
                            break
                    ws += prod
                acc += ws * apred
            alpha[i, sp] = acc
            tot += acc
        if tot <= 0.0:
            return alpha, alpha, _ERR_UNDERFLOW
        for sp in range(n_states):
            alpha[i, sp] /= tot

    beta = np.zeros((n + 1, n_states))
    sf = 0
    ok = True
    for k in range(m):
        jf = n_recs[k] - n - d_min
        if jf < 0 or jf >= delta:
            ok = False
            jf = 0
        sf = sf * delta + jf
    if not ok:
        return alpha, beta, _ERR_UNDERFLOW
    beta[n, sf] = 1.0

    post = np.zeros((n, q))
    for i in range(n, 0, -1):
        # combine alpha_{i-1} with branch metrics of step i and beta_i,
        # then fill beta_{i-1} from the xi-marginalized branch metrics
        tot = 0.0
        for s in range(n_states):
            apred = alpha[i - 1, s]
            accb = 0.0
            for mv in range(n_moves):
                ssucc = 0
                valid = True
                for k in range(m):
                    jq = digits[s, k] + moves[mv, k]
                    if jq < 0 or jq >= delta:
                        valid = False
                        break
                    ssucc = ssucc * delta + jq
                if not valid:
                    continue
                bsucc = beta[i, ssucc]
                if bsucc == 0.0 and apred == 0.0:
                    continue
                for k in range(m):
                    dp = d_min + digits[s, k] + moves[mv, k]
                    u = moves[mv, k]
                    pos = i + dp
                    nr = n_recs[k]
                    t_del = u + 1
                    a = 0.0
                    if 0 <= t_del <= i_max and (
                        t_del == 0 or (pos <= nr and pos + 1 - t_del >= 1)
                    ):
                        a = piq**t_del * p_del
                    b = 0.0
                    rv = -1
                    if 0 <= u <= i_max and 1 <= pos <= nr and pos - u >= 1:
                        b = piq**u * p_t
                        rv = rs[k, pos - 1]
                    a_buf[k] = a
                    b_buf[k] = b
                    rv_buf[k] = rv
                ws = 0.0
                for xi in range(q):
                    prod = priors[i - 1, xi]
                    for k in range(m):
                        fv = f_match if xi == rv_buf[k] else f_miss
                        prod *= a_buf[k] + b_buf[k] * fv
                        if prod == 0.0:
                            break
                    ws += prod
                    if bsucc > 0.0 and apred > 0.0:
                        post[i - 1, xi] += apred * prod * bsucc
                accb += ws * bsucc
            beta[i - 1, s] = accb
            tot += accb
        if tot <= 0.0:
            return alpha, beta, _ERR_UNDERFLOW
        for s in range(n_states):
            beta[i - 1, s] /= tot
        ptot = 0.0
        for xi in range(q):
            ptot += post[i - 1, xi]
        if ptot <= 0.0:
            return alpha, beta, _ERR_UNDERFLOW
        for xi in range(q):
            post[i - 1, xi] /= ptot
    return post, beta, _OK


def bcjr_joint(
    rs: list[ReceivedSeq],
    priors: NDArray[np.float64],
    ch: IdsChannelParams,
    win: DriftWindow,
    m_cap: int = 3,
) -> tuple[PosteriorMatrix, JointDecodeInfo]:
    """Joint MAP posteriors from M noisy copies of one codeword."""
    m = len(rs)
    if m < 1:
        raise ValueError("need at least one received copy")
    if m > m_cap:
        raise ComplexityError(
            f"M={m} exceeds cap {m_cap}: the product trellis has "
            f"n_in*delta^M = {rs[0].source_len * win.width**m} states"
        )
    n = rs[0].source_len
    if any(r.source_len != n for r in rs):
        raise ValueError("all copies must share the same source length")
    for k, r in enumerate(rs):
        if not win.contains(r.drift):
            raise OutOfWindowError(
                f"copy {k}: drift {r.drift} outside window [{win.d_min}, {win.d_max}]"
            )
    if priors.shape[0] != n:
        raise ValueError(f"priors have {priors.shape[0]} rows, expected {n}")
    if np.abs(priors.sum(axis=1) - 1.0).max() > 1e-9:
        raise ValueError("prior rows must sum to 1")
    q = priors.shape[1]
    max_nr = max(r.n_rec for r in rs)
    rs_mat = np.zeros((m, max(max_nr, 1)), dtype=np.int8)
    n_recs = np.zeros(m, dtype=np.int64)
    for k, r in enumerate(rs):
        rs_mat[k, : r.n_rec] = r.symbols
        n_recs[k] = r.n_rec
    post, _, status = _joint_fb(
        rs_mat,
        n_recs,
        np.ascontiguousarray(priors, dtype=np.float64),
        ch.p_ins,
        ch.p_del,
        ch.p_sub if q > 1 else 0.0,
        ch.i_max,
        win.d_min,
        win.d_max,
    )
    if status == _ERR_UNDERFLOW:
        raise UnderflowError("received copies have zero joint probability")
    info = JointDecodeInfo(n_in=n, delta=win.width, m=m)
    return PosteriorMatrix(probs=post), info


@njit(cache=True)
def _conv_band_table(r, n_in, p_ins, p_del, p_sub, i_max, d_min, d_max):
    """Banded drift transition weights for every coded bit position and value.

    band[g, v, j, k] weights the move from drift index j to j + k - 1 while
    consuming the bit at 1-based position g + 1 with transmitted value v. Only
    drift increments u = k - 1 in [-1, i_max] are reachable per consumed bit.
    """
    n_rec = r.shape[0]
    delta = d_max - d_min + 1
    p_t = 1.0 - p_ins - p_del
    piq = p_ins / 2.0
    band = np.zeros((n_in, 2, delta, i_max + 2))
    for g in range(n_in):
        pos1 = g + 1
        for v in range(2):
            for j in range(delta):
                d = d_min + j
                for k in range(i_max + 2):
                    u = k - 1
                    if j + u < 0 or j + u >= delta:
                        continue
                    pos = pos1 + d + u
                    w = 0.0
                    t_del = u + 1
                    if t_del <= i_max and (
                        t_del == 0 or (pos <= n_rec and pos + 1 - t_del >= 1)
                    ):
                        w += piq**t_del * p_del
                    if u >= 0 and 1 <= pos <= n_rec and pos - u >= 1:
                        rv = r[pos - 1]
                        fv = 1.0 - p_sub if v == rv else p_sub
                        w += piq**u * p_t * fv
                    band[g, v, j, k] = w
    return band


def bcjr_conv(
    r: ReceivedSeq,
    spec: ConvCodeSpec,
    offset: OffsetSeq,
    ch: IdsChannelParams,
    win: DriftWindow,
) -> tuple[PosteriorMatrix, PosteriorMatrix]:
    """MAP posteriors over input bits and transmitted coded bits.

    The outer matrix has n_msg + m rows (the zero-termination rows are
    degenerate); the inner matrix has n_in rows and refers to the coded bits
    as transmitted, i.e. after the pseudorandom offset was applied.
    """
    n_in = len(offset)
    if n_in % spec.n_c != 0:
        raise ValueError(f"offset length {n_in} not divisible by n_c={spec.n_c}")
    b_sections = n_in // spec.n_c
    n_msg = b_sections - spec.memory
    if n_msg < 1:
        raise ValueError(f"offset length {n_in} too short for memory {spec.memory}")
    if r.source_len != n_in:
        raise ValueError(f"received source_len {r.source_len} != n_in {n_in}")
    if not win.contains(r.drift):
        raise OutOfWindowError(
            f"received drift {r.drift} outside window [{win.d_min}, {win.d_max}]"
        )
    next_state, out_bits = spec.transition_tables()
    # fold the offset per section into the branch outputs
    off = offset.bits.reshape(b_sections, spec.n_c)
    sent_bits = np.empty((b_sections, spec.n_states, 2, spec.n_c), dtype=np.int8)
    for i in range(b_sections):
        sent_bits[i] = out_bits ^ off[i]
    bit_priors = np.full((b_sections, 2), 0.5)
    bit_priors[n_msg:, 0] = 1.0
    bit_priors[n_msg:, 1] = 0.0
    _, _, post_bits, post_coded, status = _conv_fb_dispatch(
        r.symbols,
        sent_bits,
        next_state,
        bit_priors,
        spec.n_c,
        ch.p_ins,
        ch.p_del,
        ch.p_sub,
        ch.i_max,
        win.d_min,
        win.d_max,
    )
    if status == _ERR_UNDERFLOW:
        raise UnderflowError("received sequence has zero probability under the model")
    return PosteriorMatrix(probs=post_bits), PosteriorMatrix(probs=post_coded)


@njit(cache=True)
def _band_fwd(out, vec, band_gv, delta, width):
    """out[j + k - 1] += vec[j] * band_gv[j, k] over the drift band."""
    out[:] = 0.0
    for j in range(delta):
        vj = vec[j]
        if vj == 0.0:
            continue
        for k in range(width):
            jp = j + k - 1
            if 0 <= jp < delta:
                out[jp] += vj * band_gv[j, k]


@njit(cache=True)
def _band_bwd(out, vec, band_gv, delta, width):
    """out[j] = sum_k band_gv[j, k] * vec[j + k - 1] over the drift band."""
    for j in range(delta):
        acc = 0.0
        for k in range(width):
            jp = j + k - 1
            if 0 <= jp < delta:
                acc += band_gv[j, k] * vec[jp]
        out[j] = acc


@njit(cache=True)
def _conv_fb_dispatch(
    r, sent_bits_per_sec, next_state, bit_priors, n_c, p_ins, p_del, p_sub, i_max, d_min, d_max
):
    """Forward/backward over the joint (conv state, drift) trellis.

    Works section by section with per-section sent-bit tables (offset folded)
    and the precomputed banded per-bit drift weights.
    """
    n_rec = r.shape[0]
    n_states = next_state.shape[0]
    b_sections = bit_priors.shape[0]
    n_in = n_c * b_sections
    delta = d_max - d_min + 1
    width = i_max + 2
    band = _conv_band_table(r, n_in, p_ins, p_del, p_sub, i_max, d_min, d_max)

    alpha = np.zeros((b_sections + 1, n_states, delta))
    alpha[0, 0, -d_min] = 1.0
    beta = np.zeros((b_sections + 1, n_states, delta))
    jf = n_rec - n_in - d_min
    beta[b_sections, 0, jf] = 1.0

    cur = np.empty(delta)
    nxt = np.empty(delta)
    for i in range(1, b_sections + 1):
        tot = 0.0
        for s in range(n_states):
            for b in range(2):
                pb = bit_priors[i - 1, b]
                if pb == 0.0:
                    continue
                cur[:] = alpha[i - 1, s]
                if not np.any(cur > 0.0):
                    continue
                for l in range(n_c):
                    g = n_c * (i - 1) + l
                    v = sent_bits_per_sec[i - 1, s, b, l]
                    _band_fwd(nxt, cur, band[g, v], delta, width)
                    cur[:] = nxt
                sp = next_state[s, b]
                for j in range(delta):
                    alpha[i, sp, j] += pb * cur[j]
        for s in range(n_states):
            for j in range(delta):
                tot += alpha[i, s, j]
        if tot <= 0.0:
            return alpha, beta, alpha[0], alpha[0], _ERR_UNDERFLOW
        alpha[i] /= tot
    for i in range(b_sections - 1, -1, -1):
        tot = 0.0
        for s in range(n_states):
            for b in range(2):
                pb = bit_priors[i, b]
                if pb == 0.0:
                    continue
                sp = next_state[s, b]
                cur[:] = beta[i + 1, sp]
                if not np.any(cur > 0.0):
                    continue
                for l in range(n_c - 1, -1, -1):
                    g = n_c * i + l
                    v = sent_bits_per_sec[i, s, b, l]
                    _band_bwd(nxt, cur, band[g, v], delta, width)
                    cur[:] = nxt
                for j in range(delta):
                    beta[i, s, j] += pb * cur[j]
        for s in range(n_states):
            for j in range(delta):
                tot += beta[i, s, j]
        if tot <= 0.0:
            return alpha, beta, alpha[0], alpha[0], _ERR_UNDERFLOW
        beta[i] /= tot

    post_bits = np.zeros((b_sections, 2))
    post_coded = np.zeros((n_in, 2))
    prefix = np.empty((n_c + 1, delta))
    suffix = np.empty((n_c + 1, delta))
    for i in range(1, b_sections + 1):
        for s in range(n_states):
            for b in range(2):
                pb = bit_priors[i - 1, b]
                if pb == 0.0:
                    continue
                sp = next_state[s, b]
                prefix[0] = alpha[i - 1, s]
                suffix[n_c] = beta[i, sp]
                for l in range(n_c):
                    g = n_c * (i - 1) + l
                    v = sent_bits_per_sec[i - 1, s, b, l]
                    _band_fwd(prefix[l + 1], prefix[l], band[g, v], delta, width)
                for l in range(n_c - 1, -1, -1):
                    g = n_c * (i - 1) + l
                    v = sent_bits_per_sec[i - 1, s, b, l]
                    _band_bwd(suffix[l], suffix[l + 1], band[g, v], delta, width)
                branch = pb * float(prefix[n_c] @ beta[i, sp])
                post_bits[i - 1, b] += branch
                for l in range(n_c):
                    v = sent_bits_per_sec[i - 1, s, b, l]
                    contrib = pb * float(prefix[l] @ suffix[l])
                    post_coded[n_c * (i - 1) + l, v] += contrib
        pt = post_bits[i - 1, 0] + post_bits[i - 1, 1]
        if pt <= 0.0:
            return alpha, beta, post_bits, post_coded, _ERR_UNDERFLOW
        post_bits[i - 1, 0] /= pt
        post_bits[i - 1, 1] /= pt
        for l in range(n_c):
            g = n_c * (i - 1) + l
            ct = post_coded[g, 0] + post_coded[g, 1]
            if ct <= 0.0:
                return alpha, beta, post_bits, post_coded, _ERR_UNDERFLOW
            post_coded[g, 0] /= ct
            post_coded[g, 1] /= ct
    return alpha, beta, post_bits, post_coded, _OK


def marker_priors(
    n_in: int,
    q: int,
    marker_pos: NDArray[np.int64],
    marker_vals: NDArray[np.integer],
) -> NDArray[np.float64]:
    """Uniform priors with degenerate rows at marker positions."""
    priors = np.full((n_in, q), 1.0 / q)
    priors[marker_pos] = 0.0
    priors[marker_pos, np.asarray(marker_vals, dtype=np.int64)] = 1.0
    return priors
