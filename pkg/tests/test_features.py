import numpy as np
import pytest

from idscodec.bcjr import DriftWindow, PosteriorMatrix
from idscodec.channel import IdsChannelParams, ReceivedSeq, make_rng
from idscodec.features import (
    DatasetItem,
    apply_ecct_output,
    build_aggregated_window,
    build_cross_masks,
    build_ecct_features,
    build_multicopy_batch,
    build_state_window,
    build_symbol_window,
    export_dataset,
    load_dataset,
)
from idscodec.galois import gf
from idscodec.inner_codes import ConvCodeSpec, OffsetSeq
from idscodec.outer_codes import builtin_code, from_pcm

HAMMING_H = np.array(
    [
        [1, 1, 0, 1, 1, 0, 0],
        [1, 0, 1, 1, 0, 1, 0],
        [0, 1, 1, 1, 0, 0, 1],
    ],
    dtype=np.uint8,
)


def test_symbol_window_golden():
    ch = IdsChannelParams(0.1, 0.1, 0.2)
    win = DriftWindow(-1, 1)
    r = ReceivedSeq(symbols=np.array([1], dtype=np.int8), source_len=2)
    priors = np.array([[0.7, 0.3], [0.5, 0.5]])
    ft = build_symbol_window(r, priors, ch, win)
    assert ft.tokens.shape == (2, 6)
    # position 1: only drift 0 lands inside r (received index 1, value 1)
    row = ft.tokens[0]
    assert row[0] == 0.5 and row[1] == 0.5  # drift -1 padded
    assert row[2] == pytest.approx(0.7 * 0.2)  # xi=0 vs r=1: F = p_sub
    assert row[3] == pytest.approx(0.3 * 0.8)  # xi=1 matches: F = 1 - p_sub
    assert row[4] == 0.5 and row[5] == 0.5  # drift +1 padded
    # position 2: only drift -1 lands inside r
    row = ft.tokens[1]
    assert row[0] == pytest.approx(0.5 * 0.2)
    assert row[1] == pytest.approx(0.5 * 0.8)
    assert (row[2:] == 0.5).all()
    assert ft.pad_value == 0.5
    assert ft.layout["kind"] == "symbol_window"


def test_symbol_window_drop_emission_factor():
    ch = IdsChannelParams(0.1, 0.1, 0.2)
    win = DriftWindow(0, 0)
    r = ReceivedSeq(symbols=np.array([0, 1], dtype=np.int8), source_len=2)
    priors = np.array([[0.7, 0.3], [0.4, 0.6]])
    ft = build_symbol_window(r, priors, ch, win, drop_emission_factor=True)
    assert np.allclose(ft.tokens, priors)


def test_symbol_window_range_invariant():
    ch = IdsChannelParams(0.05, 0.05, 0.1)
    win = DriftWindow(-3, 3)
    rng = make_rng(5)
    r = ReceivedSeq(symbols=rng.integers(4, size=9).astype(np.int8), source_len=10)
    priors = np.full((10, 4), 0.25)
    ft = build_symbol_window(r, priors, ch, win)
    assert (ft.tokens >= 0).all() and (ft.tokens <= 1).all()
    # every out-of-range slot carries exactly the pad value
    for i in range(10):
        for j in range(win.width):
            pos = i + 1 + win.d_min + j
            if not 1 <= pos <= r.n_rec:
                assert (ft.tokens[i, j * 4 : (j + 1) * 4] == 0.25).all()


def test_aggregated_window_binary_only():
    ch = IdsChannelParams(0.1, 0.1, 0.0)
    win = DriftWindow(-1, 1)
    r = ReceivedSeq(symbols=np.array([1, 0], dtype=np.int8), source_len=2)
    ft = build_aggregated_window(r, np.full((2, 2), 0.5), ch, win)
    assert ft.tokens.shape == (2, 3)
    assert ft.pad_value == 1.0
    # in-range slots sum the two symbol entries: 0.5*F(0,r) + 0.5*F(1,r) = 0.5
    assert ft.tokens[0, 1] == pytest.approx(0.5)
    # padded slots sum the two symbol pads to exactly 1
    assert ft.tokens[0, 0] == 1.0
    with pytest.raises(ValueError, match="q=2"):
        build_aggregated_window(r, np.full((2, 4), 0.25), ch, win)


def test_state_window_golden():
    spec = ConvCodeSpec("5,7")
    ch = IdsChannelParams(0.0, 0.0, 0.1)
    win = DriftWindow(0, 0)
    bits = np.array([1, 0, 0, 1], dtype=np.int8)
    off = OffsetSeq(bits=np.array([0, 1, 0, 0], dtype=np.int8), seed=0)
    r = ReceivedSeq(symbols=bits, source_len=4)
    ft = build_state_window(r, spec, off, ch, win)
    assert ft.tokens.shape == (2, 4)
    # section 1 sees r xor o = (1, 1); zeta = 0b11 -> product of matches
    assert ft.tokens[0, 0b11] == pytest.approx(0.25 * 0.9 * 0.9)
    assert ft.tokens[0, 0b00] == pytest.approx(0.25 * 0.1 * 0.1)
    assert ft.tokens[0, 0b10] == pytest.approx(0.25 * 0.9 * 0.1)
    assert ft.pad_value == 0.25


def test_state_window_padding_past_received_end():
    spec = ConvCodeSpec("5,7")
    ch = IdsChannelParams(0.1, 0.1, 0.1)
    win = DriftWindow(-1, 1)
    # two bits deleted: n_rec < n_in, so late windows fall off the end
    r = ReceivedSeq(symbols=np.zeros(4, dtype=np.int8), source_len=6)
    off = OffsetSeq(bits=np.zeros(6, dtype=np.int8), seed=0)
    ft = build_state_window(r, spec, off, ch, win)
    assert ft.tokens.shape == (3, 12)
    # last section, drift +1 reaches index 7 > n_rec=4: padded
    assert (ft.tokens[2, 2 * 4 : 3 * 4] == 0.25).all()


def test_cross_masks_golden_5_7():
    spec = ConvCodeSpec("5,7")
    m_codeword_to_msg, m_msg_to_codeword = build_cross_masks(spec, 2)
    g_expect = np.array(
        [
            [1, 1, 0, 1, 1, 1, 0, 0],
            [0, 0, 1, 1, 0, 1, 1, 1],
            [0, 0, 0, 0, 1, 1, 0, 1],
            [0, 0, 0, 0, 0, 0, 1, 1],
        ],
        dtype=bool,
    )
    assert np.array_equal(m_msg_to_codeword.allowed, g_expect)
    assert np.array_equal(m_codeword_to_msg.allowed, g_expect.T)


def test_multicopy_batch_padding():
    t1 = build_symbol_window(
        ReceivedSeq(symbols=np.array([0, 1], dtype=np.int8), source_len=2),
        np.full((2, 2), 0.5),
        IdsChannelParams(0.1, 0.1, 0.0),
        DriftWindow(-1, 1),
    )
    batch = build_multicopy_batch([t1, t1], m_max=4)
    assert batch.tokens.shape == (8, 6)
    assert batch.m_k == 2 and batch.m_max == 4
    assert np.array_equal(batch.positions, [0, 1] * 4)
    assert np.array_equal(batch.copy_index, [0, 0, 1, 1, 2, 2, 3, 3])
    assert not batch.pad_flags[:4].any() and batch.pad_flags[4:].all()
    assert (batch.tokens[4:] == t1.pad_value).all()
    with pytest.raises(ValueError, match="exceeds m_max"):
        build_multicopy_batch([t1, t1], m_max=1)


def test_ecct_features_golden():
    code = from_pcm(HAMMING_H, gf(1))
    cw = code.encode(np.array([1, 0, 1, 1], dtype=np.uint8))
    # confident correct posteriors except a flip at position 0
    probs = np.where(cw[:, None] == 0, [0.9, 0.1], [0.1, 0.9]).astype(float)
    probs[0] = probs[0][::-1]
    feats = build_ecct_features(code, probs, true_outer=cw)
    assert np.allclose(feats.magnitude, 0.8)
    assert np.allclose(np.abs(feats.syndrome_bipolar), 1.0)
    # noise target flags exactly the flipped position
    expect = np.zeros(7, dtype=np.uint8)
    expect[0] = 1
    assert np.array_equal(feats.target_noise, expect)
    # hard decision of x_phi equals the corrupted word
    corrupted = cw.copy()
    corrupted[0] ^= 1
    assert np.array_equal((feats.x_phi < 0).astype(np.uint8), corrupted)
    # syndrome part matches phi(syn(corrupted))
    assert np.array_equal(
        feats.syndrome_bipolar, 1.0 - 2.0 * code.syndrome(corrupted).astype(float)
    )


def test_ecct_zero_confidence_ties_break_to_plus():
    code = from_pcm(HAMMING_H, gf(1))
    probs = np.full((7, 2), 0.5)
    feats = build_ecct_features(code, probs)
    assert (feats.x_phi == 0).all()
    assert (feats.syndrome_bipolar == 1.0).all()
    assert feats.target_noise is None


def test_ecct_rejects_nonbinary_and_bad_shapes():
    qcode = builtin_code("ldpc_q4_64_32")
    with pytest.raises(ValueError, match="binary"):
        build_ecct_features(qcode, np.full((64, 4), 0.25))
    code = from_pcm(HAMMING_H, gf(1))
    with pytest.raises(ValueError, match="posterior shape"):
        build_ecct_features(code, np.full((6, 2), 0.5))


def test_apply_ecct_output_inverts_noise():
    code = from_pcm(HAMMING_H, gf(1))
    cw = code.encode(np.array([0, 1, 1, 0], dtype=np.uint8))
    probs = np.where(cw[:, None] == 0, [0.8, 0.2], [0.2, 0.8]).astype(float)
    probs[[2, 5]] = probs[[2, 5]][:, ::-1]
    feats = build_ecct_features(code, probs, true_outer=cw)
    # a perfect noise prediction recovers the codeword; z_hat is a logit for
    # the noise bit (positive = flip predicted), hence the sign convention
    z_hat = 2.0 * feats.target_noise.astype(float) - 1.0
    assert np.array_equal(apply_ecct_output(z_hat, feats.x_phi), cw)


def test_ecct_features_accept_posterior_matrix():
    code = from_pcm(HAMMING_H, gf(1))
    pm = PosteriorMatrix(probs=np.full((7, 2), 0.5))
    feats = build_ecct_features(code, pm)
    assert feats.x_phi.shape == (7,)


def test_dataset_roundtrip(tmp_path):
    rng = make_rng(3)
    items = [
        DatasetItem(
            features=rng.random((4, 6)).astype(np.float32),
            target=rng.integers(2, size=5).astype(np.uint8),
        )
        for _ in range(7)
    ]
    stem = tmp_path / "set"
    manifest = export_dataset(items, stem, {"note": "test"})
    assert manifest["version"] == 1
    assert manifest["count"] == 7
    assert manifest["feature_shape"] == [4, 6]
    back_manifest, it = load_dataset(stem)
    assert back_manifest == manifest
    loaded = list(it)
    assert len(loaded) == 7
    for orig, back in zip(items, loaded):
        assert np.array_equal(orig.features, back.features)
        assert np.array_equal(orig.target, back.target)


def test_dataset_rejects_heterogeneous_items(tmp_path):
    items = [
        DatasetItem(features=np.zeros((2, 2), np.float32), target=np.zeros(2, np.uint8)),
        DatasetItem(features=np.zeros((2, 3), np.float32), target=np.zeros(2, np.uint8)),
    ]
    with pytest.raises(ValueError, match="heterogeneous"):
        export_dataset(items, tmp_path / "bad", {})
    with pytest.raises(ValueError, match="empty"):
        export_dataset([], tmp_path / "empty", {})


def test_dataset_manifest_requires_version(tmp_path):
    stem = tmp_path / "v"
    export_dataset(
        [DatasetItem(features=np.zeros((1, 1), np.float32), target=np.zeros(1, np.uint8))],
        stem,
        {},
    )
    import json

    man = json.loads((tmp_path / "v.manifest.json").read_text())
    del man["version"]
    (tmp_path / "v.manifest.json").write_text(json.dumps(man))
    with pytest.raises(ValueError, match="version"):
        load_dataset(stem)
