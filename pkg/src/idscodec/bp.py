"""Nonbinary sum-product belief propagation on the Tanner graph.

Messages live in the probability domain with per-message renormalization
and a small floor to keep products positive. Check-node updates convolve
incoming beliefs under the GF(q) check equation; the edge weights act as
symbol permutations, so a message entering a check is first re-indexed by
y = w * x and the extrinsic convolution is read back out through the same
permutation. The schedule is flooding: all checks, then all variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from numpy.typing import NDArray

from .bcjr import PosteriorMatrix
from .outer_codes import LinearBlockCode

_EPS = 1e-30


@dataclass(frozen=True)
class BpConfig:
    max_iters: int = 50
    early_stop: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters={self.max_iters} must be >= 1")


@dataclass(frozen=True)
class BpResult:
    hard: NDArray[np.int8]
    marginals: PosteriorMatrix
    converged: bool
    iterations: int


@dataclass(frozen=True)
class TannerGraph:
    """CSR-style edge layout of a parity-check matrix, shared across decodes."""

    n_vars: int
    n_checks: int
    q: int
    check_ptr: NDArray[np.int64]  # edges grouped by check
    edge_var: NDArray[np.int64]
    edge_weight: NDArray[np.uint8]
    var_ptr: NDArray[np.int64]  # edge ids grouped by variable
    var_edges: NDArray[np.int64]
    mul_table: NDArray[np.uint8]

    @staticmethod
    def from_code(code: LinearBlockCode) -> "TannerGraph":
        h = code.pcm
        m, n = h.shape
        checks, variables = np.nonzero(h)
        order = np.lexsort((variables, checks))
        checks, variables = checks[order], variables[order]
        weights = h[checks, variables]
        check_ptr = np.zeros(m + 1, dtype=np.int64)
        np.add.at(check_ptr, checks + 1, 1)
        check_ptr = np.cumsum(check_ptr)
        by_var = np.argsort(variables, kind="stable")
        var_ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(var_ptr, variables + 1, 1)
        var_ptr = np.cumsum(var_ptr)
        return TannerGraph(
            n_vars=n,
            n_checks=m,
            q=code.field.q,
            check_ptr=check_ptr,
            edge_var=variables.astype(np.int64),
            edge_weight=weights.astype(np.uint8),
            var_ptr=var_ptr,
            var_edges=by_var.astype(np.int64),
            mul_table=code.field.mul_table,
        )


@njit(cache=True)
def _syndrome_ok(hard, check_ptr, edge_var, edge_weight, mul):
    for c in range(check_ptr.shape[0] - 1):
        acc = 0
        for e in range(check_ptr[c], check_ptr[c + 1]):
            acc ^= mul[edge_weight[e], hard[edge_var[e]]]
        if acc != 0:
            return False
    return True


@njit(cache=True)
def _bp_kernel(
    priors, check_ptr, edge_var, edge_weight, var_ptr, var_edges, mul, max_iters, early_stop
):
    n, q = priors.shape
    n_edges = edge_var.shape[0]
    n_checks = check_ptr.shape[0] - 1
    v2c = np.empty((n_edges, q))
    c2v = np.ones((n_edges, q)) / q
    for e in range(n_edges):
        for x in range(q):
            v2c[e, x] = priors[edge_var[e], x]
    beliefs = priors.copy()
    hard = np.empty(n, dtype=np.int8)
    for v in range(n):
        hard[v] = np.argmax(beliefs[v])
    if early_stop and _syndrome_ok(hard, check_ptr, edge_var, edge_weight, mul):
        return hard, beliefs, True, 0

    max_deg = 0
    for c in range(n_checks):
        d = check_ptr[c + 1] - check_ptr[c]
        if d > max_deg:
            max_deg = d
    prefix = np.empty((max_deg + 1, q))
    suffix = np.empty((max_deg + 1, q))
    perm = np.empty((max_deg, q))
    conv = np.empty(q)

    iters = 0
    converged = False
    for it in range(max_iters):
        iters = it + 1
        # check-node update via prefix/suffix XOR-convolutions
        for c in range(n_checks):
            lo = check_ptr[c]
            deg = check_ptr[c + 1] - lo
            for k in range(deg):
                e = lo + k
                w = edge_weight[e]
                for x in range(q):
                    perm[k, mul[w, x]] = v2c[e, x]
            for x in range(q):
                prefix[0, x] = 1.0 if x == 0 else 0.0
                suffix[deg, x] = 1.0 if x == 0 else 0.0
            for k in range(deg):
                for z in range(q):
                    s = 0.0
                    for y in range(q):
                        s += prefix[k, y] * perm[k, z ^ y]
                    conv[z] = s
                for z in range(q):
                    prefix[k + 1, z] = conv[z]
            for k in range(deg - 1, -1, -1):
                for z in range(q):
                    s = 0.0
                    for y in range(q):
                        s += suffix[k + 1, y] * perm[k, z ^ y]
                    conv[z] = s
                for z in range(q):
                    suffix[k, z] = conv[z]
            for k in range(deg):
                e = lo + k
                w = edge_weight[e]
                tot = 0.0
                for x in range(q):
                    s = 0.0
                    z = mul[w, x]
                    for y in range(q):
                        s += prefix[k, y] * suffix[k + 1, z ^ y]
                    s = max(s, _EPS)
                    c2v[e, x] = s
                    tot += s
                for x in range(q):
                    c2v[e, x] /= tot
        # variable-node update and beliefs
        for v in range(n):
            lo = var_ptr[v]
            deg = var_ptr[v + 1] - lo
            for x in range(q):
                beliefs[v, x] = priors[v, x]
            for k in range(deg):
                e = var_edges[lo + k]
                for x in range(q):
                    beliefs[v, x] *= c2v[e, x]
            for k in range(deg):
                e = var_edges[lo + k]
                tot = 0.0
                for x in range(q):
                    cv = max(c2v[e, x], _EPS)
                    val = max(beliefs[v, x] / cv, 0.0) if beliefs[v, x] > 0.0 else 0.0
                    v2c[e, x] = val
                    tot += val
                if tot <= 0.0:
                    # all-zero extrinsic product: fall back to the prior
                    for x in range(q):
                        v2c[e, x] = priors[v, x]
                else:
                    for x in range(q):
                        v2c[e, x] /= tot
            tot = 0.0
            for x in range(q):
                beliefs[v, x] = max(beliefs[v, x], _EPS)
                tot += beliefs[v, x]
            for x in range(q):
                beliefs[v, x] /= tot
            hard[v] = np.argmax(beliefs[v])
        if early_stop and _syndrome_ok(hard, check_ptr, edge_var, edge_weight, mul):
            converged = True
            break
    if not converged:
        converged = _syndrome_ok(hard, check_ptr, edge_var, edge_weight, mul)
    return hard, beliefs, converged, iters


def bp_decode(
    code: LinearBlockCode,
    channel_probs: PosteriorMatrix | NDArray[np.float64],
    cfg: BpConfig = BpConfig(),
    graph: TannerGraph | None = None,
) -> BpResult:
    """Sum-product decode from per-symbol channel posteriors.

    Pass a prebuilt TannerGraph to amortize graph construction over a
    Monte Carlo run; it must belong to the same code.
    """
    priors = channel_probs.probs if isinstance(channel_probs, PosteriorMatrix) else channel_probs
    if priors.shape != (code.n_out, code.field.q):
        raise ValueError(
            f"channel_probs shape {priors.shape} != ({code.n_out}, {code.field.q})"
        )
    g = graph if graph is not None else TannerGraph.from_code(code)
    hard, beliefs, converged, iters = _bp_kernel(
        np.ascontiguousarray(priors, dtype=np.float64),
        g.check_ptr,
        g.edge_var,
        g.edge_weight,
        g.var_ptr,
        g.var_edges,
        g.mul_table,
        cfg.max_iters,
        cfg.early_stop,
    )
    beliefs = beliefs / beliefs.sum(axis=1, keepdims=True)
    return BpResult(
        hard=hard,
        marginals=PosteriorMatrix(probs=beliefs),
        converged=bool(converged),
        iterations=int(iters),
    )
