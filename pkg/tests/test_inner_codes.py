import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idscodec.inner_codes import (
    ConvCodeSpec,
    MarkerSpec,
    OffsetSeq,
    conv_encode,
    conv_generator_matrix,
    gen_offset,
    marker_encode,
    marker_positions_mask,
    marker_strip,
)


def test_marker_encode_layout():
    spec = MarkerSpec.from_string("001", 3)
    outer = np.array([1, 1, 1, 0, 0, 0], dtype=np.int8)
    inner, pos = marker_encode(outer, spec)
    assert np.array_equal(inner, [1, 1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1])
    assert np.array_equal(pos, [3, 4, 5, 9, 10, 11])


def test_marker_inner_length_96_by_6():
    spec = MarkerSpec.from_string("001", 6)
    assert spec.inner_length(96) == 144
    inner, _ = marker_encode(np.zeros(96, dtype=np.int8), spec)
    assert len(inner) == 144


def test_marker_partial_trailing_block_gets_no_marker():
    spec = MarkerSpec.from_string("01", 4)
    inner, pos = marker_encode(np.arange(6, dtype=np.int8) % 2, spec)
    # 4 symbols + marker + 2 leftover symbols
    assert len(inner) == 8
    assert np.array_equal(pos, [4, 5])


def test_marker_strip_roundtrip():
    spec = MarkerSpec.from_string("001", 6)
    rng = np.random.default_rng(0)
    outer = rng.integers(2, size=96).astype(np.int8)
    inner, pos = marker_encode(outer, spec)
    assert np.array_equal(marker_strip(inner, pos), outer)
    mask = marker_positions_mask(len(inner), pos)
    assert mask.sum() == len(pos)
    assert np.array_equal(inner[mask], np.tile(spec.marker, len(pos) // 3))


def test_marker_empty_outer_rejected():
    with pytest.raises(ValueError, match="non-empty"):
        marker_encode(np.array([], dtype=np.int8), MarkerSpec.from_string("0", 2))


def test_conv_spec_5_7():
    spec = ConvCodeSpec("5,7")
    assert spec.n_c == 2
    assert spec.memory == 2
    assert spec.n_states == 4
    assert spec.inner_length(96) == 196
    # impulse response of (5,7)_8 is 11 01 11
    g = conv_generator_matrix(spec, 1)
    assert np.array_equal(g[0], [1, 1, 0, 1, 1, 1])


def test_conv_spec_rejects_zero_poly():
    with pytest.raises(ValueError, match="zero generator"):
        ConvCodeSpec("0,7")


def test_conv_encode_zero_message_is_offset():
    spec = ConvCodeSpec("5,7")
    off = gen_offset(spec.inner_length(5), 42)
    out = conv_encode(np.zeros(5, dtype=np.int8), spec, off)
    assert np.array_equal(out, off.bits)


def test_conv_encode_matches_generator_matrix():
    spec = ConvCodeSpec("5,7")
    rng = np.random.default_rng(1)
    msg = rng.integers(2, size=10).astype(np.int8)
    n_in = spec.inner_length(10)
    zero_off = OffsetSeq(bits=np.zeros(n_in, dtype=np.int8), seed=0)
    direct = conv_encode(msg, spec, zero_off)
    g = conv_generator_matrix(spec, 10)
    padded = np.concatenate([msg, np.zeros(spec.memory, dtype=np.int8)])
    via_matrix = padded @ g % 2
    assert np.array_equal(direct, via_matrix)


def test_conv_encode_offset_length_checked():
    spec = ConvCodeSpec("5,7")
    with pytest.raises(ValueError, match="offset length"):
        conv_encode(np.zeros(5, dtype=np.int8), spec, gen_offset(3, 0))


def test_gen_offset_deterministic():
    a = gen_offset(50, 7)
    b = gen_offset(50, 7)
    assert np.array_equal(a.bits, b.bits)
    assert a.seed == 7
    assert not np.array_equal(a.bits, gen_offset(50, 8).bits)
    with pytest.raises(ValueError):
        gen_offset(0, 7)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**32))
def test_conv_encode_is_linear_modulo_offset(n_msg, seed):
    spec = ConvCodeSpec("5,7")
    rng = np.random.default_rng(seed)
    m1 = rng.integers(2, size=n_msg).astype(np.int8)
    m2 = rng.integers(2, size=n_msg).astype(np.int8)
    zero_off = OffsetSeq(bits=np.zeros(spec.inner_length(n_msg), dtype=np.int8), seed=0)
    c1 = conv_encode(m1, spec, zero_off)
    c2 = conv_encode(m2, spec, zero_off)
    c12 = conv_encode((m1 + m2) % 2, spec, zero_off)
    assert np.array_equal(c12, (c1 + c2) % 2)


def test_conv_rate_third_code():
    spec = ConvCodeSpec("5,7,7")
    assert spec.n_c == 3
    assert spec.inner_length(4) == 18
    out = conv_encode(
        np.array([1, 0, 0, 0], dtype=np.int8),
        spec,
        OffsetSeq(bits=np.zeros(18, dtype=np.int8), seed=0),
    )
    assert np.array_equal(out[:9], [1, 1, 1, 0, 1, 1, 1, 1, 1])
