"""Inner encoders: marker insertion and zero-terminated convolutional coding.

Markers anchor synchronization for the drift decoder; the convolutional code
instead spreads each input bit over several coded bits and is combined with a
pseudorandom offset to break its cyclic structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .channel import make_rng


@dataclass(frozen=True)
class MarkerSpec:
    marker: NDArray[np.int8]
    interval: int

    def __post_init__(self):
        if len(self.marker) < 1:
            raise ValueError("marker must contain at least one symbol")
        if self.interval < 1:
            raise ValueError(f"marker interval {self.interval} must be >= 1")

    @staticmethod
    def from_string(marker: str, interval: int) -> "MarkerSpec":
        return MarkerSpec(np.array([int(c) for c in marker], dtype=np.int8), interval)

    def inner_length(self, n_out: int) -> int:
        return n_out + len(self.marker) * (n_out // self.interval)


def marker_encode(
    outer: NDArray[np.integer], spec: MarkerSpec
) -> tuple[NDArray[np.int8], NDArray[np.int64]]:
    """Insert the marker after every complete block of `interval` symbols.

    A trailing marker is emitted when the interval divides the outer length.
    Returns the inner codeword and the indices of marker symbols within it.
    """
    n_out = len(outer)
    if n_out == 0:
        raise ValueError("outer codeword must be non-empty")
    out: list[int] = []
    marker_pos: list[int] = []
    for start in range(0, n_out, spec.interval):
        block = outer[start : start + spec.interval]
        out.extend(int(s) for s in block)
        if len(block) == spec.interval:
            marker_pos.extend(range(len(out), len(out) + len(spec.marker)))
            out.extend(int(s) for s in spec.marker)
    return np.asarray(out, dtype=np.int8), np.asarray(marker_pos, dtype=np.int64)


def marker_positions_mask(n_in: int, marker_pos: NDArray[np.int64]) -> NDArray[np.bool_]:
    mask = np.zeros(n_in, dtype=bool)
    mask[marker_pos] = True
    return mask


def marker_strip(inner: NDArray[np.integer], marker_pos: NDArray[np.int64]) -> NDArray[np.int8]:
    mask = marker_positions_mask(len(inner), marker_pos)
    return np.asarray(inner, dtype=np.int8)[~mask]


@dataclass(frozen=True)
class ConvCodeSpec:
    """Rate 1/n_c binary convolutional code given by octal generator polynomials.

    Tap bit 0 of each polynomial vector multiplies the current input; the
    octal string "5,7" therefore yields the canonical impulse response
    11 01 11 for a memory-2 code.
    """

    polys_octal: str
    n_c: int = field(init=False)
    memory: int = field(init=False)
    taps: NDArray[np.int8] = field(init=False, repr=False, compare=False)

    k_c = 1

    def __post_init__(self):
        polys = [int(tok.strip(), 8) for tok in self.polys_octal.split(",")]
        if not polys:
            raise ValueError("need at least one generator polynomial")
        m = max(p.bit_length() for p in polys) - 1
        taps = np.zeros((len(polys), m + 1), dtype=np.int8)
        for l, p in enumerate(polys):
            if p == 0:
                raise ValueError("zero generator polynomial")
            bits = [int(b) for b in bin(p)[2:]]
            # most significant octal bit is the current-input tap
            taps[l, : len(bits)] = bits
        if not taps[:, 0].any():
            raise ValueError("at least one polynomial must tap the current input")
        object.__setattr__(self, "n_c", len(polys))
        object.__setattr__(self, "memory", m)
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    def inner_length(self, n_msg: int) -> int:
        return self.n_c * (n_msg + self.memory)

    def step(self, state: int, bit: int) -> tuple[int, NDArray[np.int8]]:
        """One shift-register step: returns (next_state, n_c output bits).

        State encodes the previous `memory` inputs, most recent in the MSB.
        """
        m = self.memory
        window = np.empty(m + 1, dtype=np.int8)
        window[0] = bit
        for j in range(1, m + 1):
            window[j] = (state >> (m - j)) & 1
        out = (self.taps @ window) % 2
        next_state = ((bit << (m - 1)) | (state >> 1)) if m > 0 else 0
        return next_state, out.astype(np.int8)

    def transition_tables(self) -> tuple[NDArray[np.int64], NDArray[np.int8]]:
        """(next_state[s, b], out_bits[s, b, :]) lookup tables."""
        next_state = np.zeros((self.n_states, 2), dtype=np.int64)
        out_bits = np.zeros((self.n_states, 2, self.n_c), dtype=np.int8)
        for s in range(self.n_states):
            for b in (0, 1):
                next_state[s, b], out_bits[s, b] = self.step(s, b)
        return next_state, out_bits


@dataclass(frozen=True)
class OffsetSeq:
    bits: NDArray[np.int8]
    seed: int

    def __len__(self) -> int:
        return len(self.bits)


def gen_offset(n_in: int, seed: int) -> OffsetSeq:
    """Deterministic pseudorandom offset; regenerable from (seed, n_in)."""
    if n_in < 1:
        raise ValueError(f"offset length {n_in} must be >= 1")
    rng = make_rng(seed)
    return OffsetSeq(bits=rng.integers(2, size=n_in).astype(np.int8), seed=seed)


def conv_encode(
    msg: NDArray[np.integer], spec: ConvCodeSpec, offset: OffsetSeq
) -> NDArray[np.int8]:
    """Zero-terminate, run the shift register, then XOR the offset."""
    n_in = spec.inner_length(len(msg))
    if len(offset) != n_in:
        raise ValueError(f"offset length {len(offset)} != codeword length {n_in}")
    padded = np.concatenate([np.asarray(msg, dtype=np.int8), np.zeros(spec.memory, dtype=np.int8)])
    out = np.empty(n_in, dtype=np.int8)
    state = 0
    for t, b in enumerate(padded):
        state, bits = spec.step(state, int(b))
        out[t * spec.n_c : (t + 1) * spec.n_c] = bits
    assert state == 0, "zero termination must end in the all-zero state"
    return (out + offset.bits) % 2


def conv_generator_matrix(spec: ConvCodeSpec, n_msg: int) -> NDArray[np.int8]:
    """Banded block-code view: row j is the impulse response shifted by n_c*j."""
    if n_msg < 1:
        raise ValueError(f"n_msg={n_msg} must be >= 1")
    rows = n_msg + spec.memory
    cols = spec.n_c * rows
    g = np.zeros((rows, cols), dtype=np.int8)
    impulse = np.zeros(rows, dtype=np.int8)
    impulse[0] = 1
    zero_off = OffsetSeq(bits=np.zeros(spec.n_c * (rows + spec.memory), dtype=np.int8), seed=0)
    response = conv_encode(impulse, spec, zero_off)[: spec.n_c * (spec.memory + 1)]
    for j in range(rows):
        span = min(len(response), cols - spec.n_c * j)
        g[j, spec.n_c * j : spec.n_c * j + span] = response[:span]
    return g
