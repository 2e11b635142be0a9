"""Independent brute-force references for the decoder tests.

These deliberately avoid the forward-backward recursions: the single-copy
and joint oracles enumerate complete event traces (insertion counts plus
delete/transmit outcomes per input symbol) and sum path probabilities; the
convolutional oracle marginalizes an exhaustive likelihood over every
message. All oracles cap insertions at the same i_max as the decoders so
both sides share one hypothesis class.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from idscodec.channel import IdsChannelParams
from idscodec.inner_codes import ConvCodeSpec, OffsetSeq, conv_encode


def enum_trace_factors(r, n: int, q: int, ch: IdsChannelParams) -> list[np.ndarray]:
    """All event traces as (n, q) per-step symbol-likelihood factor arrays.

    Step factor for symbol value xi: p_ins/q per insertion, then p_del for
    a deletion or p_trans * F(xi, aligned received symbol) for a transmit.
    """
    n_rec = len(r)
    p_t = 1.0 - ch.p_ins - ch.p_del
    piq = ch.p_ins / q
    f_match = 1.0 - ch.p_sub
    f_miss = ch.p_sub / (q - 1)
    traces: list[np.ndarray] = []
    cur: list[np.ndarray] = []

    def rec(i: int, pos: int) -> None:
        if i == n:
            if pos == n_rec:
                traces.append(np.array(cur))
            return
        for t in range(ch.i_max + 1):
            if pos + t > n_rec:
                break
            w = piq**t
            cur.append(np.full(q, w * ch.p_del))
            rec(i + 1, pos + t)
            cur.pop()
            if pos + t < n_rec:
                rv = r[pos + t]
                cur.append(w * p_t * np.where(np.arange(q) == rv, f_match, f_miss))
                rec(i + 1, pos + t + 1)
                cur.pop()

    rec(0, 0)
    return traces


def oracle_marker(r, priors: np.ndarray, ch: IdsChannelParams) -> np.ndarray:
    """Exhaustive single-copy posterior P(x_i = xi | r)."""
    n, q = priors.shape
    post = np.zeros((n, q))
    for factors in enum_trace_factors(r, n, q, ch):
        g = priors * factors
        prods = g.sum(axis=1)
        for j in range(n):
            others = 1.0
            for k in range(n):
                if k != j:
                    others *= prods[k]
            post[j] += g[j] * others
    return post / post.sum(axis=1, keepdims=True)


def oracle_joint(r1, r2, priors: np.ndarray, ch: IdsChannelParams) -> np.ndarray:
    """Exhaustive two-copy posterior via nested trace enumeration."""
    n, q = priors.shape
    tr1 = enum_trace_factors(r1, n, q, ch)
    tr2 = enum_trace_factors(r2, n, q, ch)
    post = np.zeros((n, q))
    for f1 in tr1:
        for f2 in tr2:
            g = priors * f1 * f2
            prods = g.sum(axis=1)
            for j in range(n):
                others = 1.0
                for k in range(n):
                    if k != j:
                        others *= prods[k]
                post[j] += g[j] * others
    return post / post.sum(axis=1, keepdims=True)


def sequence_likelihood(sent, r, ch: IdsChannelParams) -> float:
    """P(r | sent) over the capped event class, binary symbols."""
    sent = tuple(int(v) for v in sent)
    r = tuple(int(v) for v in r)
    n, n_rec = len(sent), len(r)
    p_t = 1.0 - ch.p_ins - ch.p_del
    piq = ch.p_ins / 2.0
    f_match, f_miss = 1.0 - ch.p_sub, ch.p_sub

    @lru_cache(maxsize=None)
    def lk(i: int, pos: int) -> float:
        if i == n:
            return 1.0 if pos == n_rec else 0.0
        acc = 0.0
        for t in range(ch.i_max + 1):
            if pos + t > n_rec:
                break
            w = piq**t
            acc += w * ch.p_del * lk(i + 1, pos + t)
            if pos + t < n_rec:
                fv = f_match if sent[i] == r[pos + t] else f_miss
                acc += w * p_t * fv * lk(i + 1, pos + t + 1)
        return acc

    return lk(0, 0)


def oracle_conv(r, spec: ConvCodeSpec, offset: OffsetSeq, ch: IdsChannelParams, n_msg: int):
    """Exhaustive input-bit and coded-bit posteriors over all 2^n_msg messages."""
    n_in = spec.inner_length(n_msg)
    b_sections = n_msg + spec.memory
    post_bits = np.zeros((b_sections, 2))
    post_coded = np.zeros((n_in, 2))
    for bits in itertools.product((0, 1), repeat=n_msg):
        msg = np.array(bits, dtype=np.int8)
        sent = conv_encode(msg, spec, offset)
        lk = sequence_likelihood(sent, r, ch)
        full = np.concatenate([msg, np.zeros(spec.memory, dtype=np.int8)])
        for i in range(b_sections):
            post_bits[i, full[i]] += lk
        for g in range(n_in):
            post_coded[g, sent[g]] += lk
    post_bits /= post_bits.sum(axis=1, keepdims=True)
    post_coded /= post_coded.sum(axis=1, keepdims=True)
    return post_bits, post_coded


def oracle_codeword_marginals(codewords: np.ndarray, priors: np.ndarray) -> np.ndarray:
    """Exact symbol marginals by summing prior likelihood over all codewords."""
    n, q = priors.shape
    post = np.zeros((n, q))
    idx = np.arange(n)
    for cw in codewords:
        lk = float(np.prod(priors[idx, cw]))
        post[idx, cw] += lk
    return post / post.sum(axis=1, keepdims=True)
