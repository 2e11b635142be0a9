import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idscodec.bp import BpConfig, TannerGraph, bp_decode
from idscodec.channel import make_rng
from idscodec.galois import gf
from idscodec.outer_codes import from_pcm

from oracles import oracle_codeword_marginals

HAMMING_H = np.array(
    [
        [1, 1, 0, 1, 1, 0, 0],
        [1, 0, 1, 1, 0, 1, 0],
        [0, 1, 1, 1, 0, 0, 1],
    ],
    dtype=np.uint8,
)


def _all_codewords(code):
    q = code.field.q
    words = []
    for msg in itertools.product(range(q), repeat=code.k):
        words.append(code.encode(np.array(msg, dtype=np.uint8)))
    return np.array(words)


def _random_priors(n, q, seed):
    rng = make_rng(seed)
    p = rng.random((n, q)) + 0.02
    return p / p.sum(axis=1, keepdims=True)


def test_bp_config_validation():
    with pytest.raises(ValueError, match="max_iters"):
        BpConfig(max_iters=0)


def test_bp_shape_validation():
    code = from_pcm(HAMMING_H, gf(1))
    with pytest.raises(ValueError, match="channel_probs shape"):
        bp_decode(code, np.full((6, 2), 0.5))


def test_bp_exact_on_binary_tree_code():
    # H is a path in the Tanner graph, hence cycle-free: BP must be exact
    h = np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8)
    code = from_pcm(h, gf(1))
    words = _all_codewords(code)
    for seed in range(10):
        priors = _random_priors(3, 2, seed)
        res = bp_decode(code, priors, BpConfig(max_iters=20, early_stop=False))
        ref = oracle_codeword_marginals(words, priors)
        assert np.abs(res.marginals.probs - ref).max() < 1e-12


def test_bp_exact_on_weighted_gf4_tree_code():
    f = gf(2)
    h = np.array([[1, 2, 0], [0, 1, 3]], dtype=np.uint8)
    code = from_pcm(h, f)
    words = _all_codewords(code)
    for seed in range(10):
        priors = _random_priors(3, 4, 1000 + seed)
        res = bp_decode(code, priors, BpConfig(max_iters=20, early_stop=False))
        ref = oracle_codeword_marginals(words, priors)
        assert np.abs(res.marginals.probs - ref).max() < 1e-12


def test_bp_zero_syndrome_returns_in_iteration_zero():
    code = from_pcm(HAMMING_H, gf(1))
    cw = code.encode(np.array([1, 0, 1, 1], dtype=np.uint8))
    priors = np.where(cw[:, None] == 0, [0.9, 0.1], [0.1, 0.9]).astype(float)
    res = bp_decode(code, priors)
    assert res.iterations == 0
    assert res.converged
    assert np.array_equal(res.hard, cw)
    assert np.array_equal(res.marginals.probs, priors)


def test_bp_early_stop_disabled_runs_full_iterations():
    code = from_pcm(HAMMING_H, gf(1))
    cw = code.encode(np.array([0, 1, 0, 1], dtype=np.uint8))
    priors = np.where(cw[:, None] == 0, [0.9, 0.1], [0.1, 0.9]).astype(float)
    res = bp_decode(code, priors, BpConfig(max_iters=5, early_stop=False))
    assert res.iterations == 5
    assert res.converged  # final hard decision still satisfies the syndrome
    assert np.array_equal(res.hard, cw)


def test_bp_corrects_single_errors_on_girth6_ldpc():
    # the girth-6 builtin code gives loopy BP room to work; single confident
    # flips must always be corrected there
    from idscodec.outer_codes import builtin_code

    code = builtin_code("ldpc_96_48")
    rng = make_rng(13)
    cw = code.encode(rng.integers(2, size=code.k).astype(np.uint8))
    graph = TannerGraph.from_code(code)
    for flip in range(0, code.n_out, 7):
        priors = np.where(cw[:, None] == 0, [0.9, 0.1], [0.1, 0.9]).astype(float)
        priors[flip] = priors[flip][::-1]
        res = bp_decode(code, priors, BpConfig(max_iters=50), graph)
        assert np.array_equal(res.hard, cw), f"failed to correct flip at {flip}"
        assert res.converged


def test_bp_prebuilt_graph_matches_fresh():
    code = from_pcm(HAMMING_H, gf(1))
    graph = TannerGraph.from_code(code)
    priors = _random_priors(7, 2, 77)
    a = bp_decode(code, priors, BpConfig(max_iters=10, early_stop=False))
    b = bp_decode(code, priors, BpConfig(max_iters=10, early_stop=False), graph)
    assert np.array_equal(a.hard, b.hard)
    assert np.array_equal(a.marginals.probs, b.marginals.probs)


def test_tanner_graph_csr_consistency():
    code = from_pcm(HAMMING_H, gf(1))
    g = TannerGraph.from_code(code)
    assert g.n_vars == 7 and g.n_checks == 3 and g.q == 2
    n_edges = int(HAMMING_H.sum())
    assert g.check_ptr[-1] == n_edges
    assert g.var_ptr[-1] == n_edges
    # reconstruct H from the edge lists
    h = np.zeros_like(HAMMING_H)
    for c in range(g.n_checks):
        for e in range(g.check_ptr[c], g.check_ptr[c + 1]):
            h[c, g.edge_var[e]] = g.edge_weight[e]
    assert np.array_equal(h, HAMMING_H)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.booleans())
def test_bp_output_invariants(seed, early_stop):
    code = from_pcm(HAMMING_H, gf(1))
    priors = _random_priors(7, 2, seed)
    res = bp_decode(code, priors, BpConfig(max_iters=15, early_stop=early_stop))
    probs = res.marginals.probs
    assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-9
    assert (probs >= 0).all()
    assert np.array_equal(res.hard, probs.argmax(axis=1))
    if res.converged:
        assert not code.syndrome(res.hard).any()
