import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idscodec.channel import make_rng
from idscodec.galois import gf, gf_matvec
from idscodec.outer_codes import (
    AlistParseError,
    LiftingError,
    Protograph,
    RankError,
    builtin_code,
    from_pcm,
    lift_protograph,
    parse_alist,
    tanner_girth,
    write_alist,
)

HAMMING_H = np.array(
    [
        [1, 1, 0, 1, 1, 0, 0],
        [1, 0, 1, 1, 0, 1, 0],
        [0, 1, 1, 1, 0, 0, 1],
    ],
    dtype=np.uint8,
)


def test_from_pcm_systematic_generator():
    code = from_pcm(HAMMING_H, gf(1))
    assert code.k == 4 and code.n_out == 7
    # every generator row satisfies all parity checks
    for row in code.gen:
        assert not code.syndrome(row).any()
    # encoding is systematic on message_cols
    msg = np.array([1, 0, 1, 1], dtype=np.uint8)
    cw = code.encode(msg)
    assert np.array_equal(cw[code.message_cols], msg)
    assert not code.syndrome(cw).any()


def test_from_pcm_rank_deficient_rejected():
    h = np.array([[1, 1, 0], [1, 1, 0]], dtype=np.uint8)
    with pytest.raises(RankError, match="rank"):
        from_pcm(h, gf(1))


def test_encode_length_checked():
    code = from_pcm(HAMMING_H, gf(1))
    with pytest.raises(ValueError, match="message length"):
        code.encode(np.zeros(5, dtype=np.uint8))
    with pytest.raises(ValueError, match="word length"):
        code.syndrome(np.zeros(6, dtype=np.uint8))


def test_alist_roundtrip_binary():
    code = from_pcm(HAMMING_H, gf(1))
    text = write_alist(code)
    back = parse_alist(text)
    assert np.array_equal(back.pcm, code.pcm)
    assert back.field.q == 2


def test_alist_roundtrip_nonbinary():
    f = gf(2)
    h = np.array([[1, 2, 3, 0], [0, 1, 2, 3]], dtype=np.uint8)
    code = from_pcm(h, f)
    back = parse_alist(write_alist(code))
    assert back.field.q == 4
    assert np.array_equal(back.pcm, h)


def test_alist_errors():
    with pytest.raises(AlistParseError, match="truncated"):
        parse_alist("7 3\n3 4\n")
    with pytest.raises(AlistParseError, match="non-integer"):
        parse_alist("7 x\n")
    with pytest.raises(AlistParseError, match="bad dimensions"):
        parse_alist("3 3\n1 1\n" + "1 " * 6 + "\n1\n1\n1\n1\n1\n1\n")
    qcode = from_pcm(np.array([[1, 2, 3, 0], [0, 1, 2, 3]], dtype=np.uint8), gf(2))
    with pytest.raises(AlistParseError, match="field order"):
        parse_alist(write_alist(qcode), gf(1))


def test_alist_out_of_range_index():
    # first column list names row 9 of a 3-row code
    lines = write_alist(from_pcm(HAMMING_H, gf(1))).splitlines()
    lines[4] = "9" + lines[4][1:]
    with pytest.raises(AlistParseError, match="out of range"):
        parse_alist("\n".join(lines) + "\n")


@pytest.mark.parametrize(
    "name,q,n,k",
    [
        ("ldpc_96_48", 2, 96, 48),
        ("ldpc_q4_64_32", 4, 64, 32),
        ("hamming_7_4", 2, 7, 4),
    ],
)
def test_builtin_codes(name, q, n, k):
    code = builtin_code(name)
    assert code.field.q == q
    assert code.n_out == n
    assert code.k == k
    rng = make_rng(0)
    msg = rng.integers(q, size=k).astype(np.uint8)
    assert not code.syndrome(code.encode(msg)).any()


def test_builtin_ldpc_96_48_structure():
    code = builtin_code("ldpc_96_48")
    h = code.pcm
    assert (h.sum(axis=0) == 3).all(), "(3,6)-regular column degree"
    assert (h.sum(axis=1) == 6).all(), "(3,6)-regular row degree"
    assert tanner_girth(h) >= 6


def test_builtin_unknown_name():
    with pytest.raises(ValueError, match="no builtin code"):
        builtin_code("nope")


def test_protograph_validation():
    with pytest.raises(ValueError, match="non-negative"):
        Protograph(np.array([[1, -1]]))
    with pytest.raises(ValueError, match="row and column"):
        Protograph(np.array([[1, 0], [1, 0]]))
    p = Protograph.from_json("[[3, 3]]")
    assert p.entries.shape == (1, 2)


def test_lift_protograph_regular():
    p = Protograph(np.array([[3, 3]]))
    code = lift_protograph(p, 16, make_rng(5))
    assert code.n_out == 32 and code.k == 16
    assert (code.pcm.sum(axis=0) == 3).all()
    assert tanner_girth(code.pcm) >= 6


def test_lift_protograph_nonbinary_weights():
    p = Protograph(np.array([[1, 2, 1, 1], [1, 1, 2, 1]]))
    code = lift_protograph(p, 16, make_rng(0), gf(2))
    assert code.field.q == 4
    weights = code.pcm[code.pcm > 0]
    assert set(np.unique(weights)) <= {1, 2, 3}
    assert (weights > 1).any()
    # generator rows satisfy H over GF(4)
    assert not gf_matvec(code.pcm, code.gen[3], gf(2)).any()


def test_lift_multiplicity_exceeds_lift():
    p = Protograph(np.array([[3, 3]]))
    with pytest.raises(LiftingError, match="multiplicity"):
        lift_protograph(p, 2, make_rng(0))
    with pytest.raises(ValueError, match="lift factor"):
        lift_protograph(p, 0, make_rng(0))


def test_tanner_girth_detects_4cycle():
    h = np.array([[1, 1, 0], [1, 1, 1]], dtype=np.uint8)
    assert tanner_girth(h) == 4


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32))
def test_codewords_satisfy_parity_property(seed):
    code = builtin_code("ldpc_q4_64_32")
    rng = make_rng(seed)
    msg = rng.integers(4, size=code.k).astype(np.uint8)
    cw = code.encode(msg)
    assert not code.syndrome(cw).any()
    assert np.array_equal(cw[code.message_cols], msg)
