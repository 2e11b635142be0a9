"""Insertion/deletion/substitution channel simulator.

Each input symbol enters a small state machine: with probability p_ins the
channel emits a uniformly random symbol and loops; with probability p_del it
consumes the symbol silently; with the remaining probability p_trans it
consumes and emits the symbol, substituted by a uniformly chosen *different*
symbol with probability p_sub. The simulator never caps insertions; the
decoder-side cap i_max only enters the trellis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .galois import GfParams

DELETED = 0
TRANSMITTED_CLEAN = 1
TRANSMITTED_SUBSTITUTED = 2


@dataclass(frozen=True)
class IdsChannelParams:
    p_ins: float
    p_del: float
    p_sub: float
    i_max: int = 2

    def __post_init__(self):
        for name in ("p_ins", "p_del", "p_sub"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.p_ins + self.p_del > 1.0:
            raise ValueError(f"p_ins + p_del = {self.p_ins + self.p_del} exceeds 1")
        if self.i_max < 0:
            raise ValueError(f"i_max={self.i_max} must be non-negative")

    @property
    def p_trans(self) -> float:
        return 1.0 - self.p_ins - self.p_del


@dataclass(frozen=True)
class ReceivedSeq:
    symbols: NDArray[np.int8]
    source_len: int

    @property
    def n_rec(self) -> int:
        return len(self.symbols)

    @property
    def drift(self) -> int:
        return self.n_rec - self.source_len


@dataclass(frozen=True)
class EventTrace:
    """Ground-truth channel events, sufficient to replay the transmission.

    For input position i: ins_counts[i] insertions were emitted (their values
    stored consecutively in ins_symbols), then the symbol met outcome[i]
    (DELETED / TRANSMITTED_CLEAN / TRANSMITTED_SUBSTITUTED); emitted[i] is the
    emitted value, or -1 on deletion.
    """

    ins_counts: NDArray[np.int64]
    ins_symbols: NDArray[np.int8]
    outcome: NDArray[np.int8]
    emitted: NDArray[np.int8]

    def replay(self, x: NDArray[np.integer]) -> NDArray[np.int8]:
        out: list[int] = []
        k = 0
        for i in range(len(x)):
            c = self.ins_counts[i]
            out.extend(self.ins_symbols[k : k + c])
            k += c
            if self.outcome[i] != DELETED:
                out.append(int(self.emitted[i]))
        return np.asarray(out, dtype=np.int8)


def make_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Counter-based PRNG so parallel trials reproduce independent of order."""
    return np.random.Generator(np.random.Philox(key=(seed & (2**64 - 1), trial)))


def transmit(
    x: NDArray[np.integer],
    ch: IdsChannelParams,
    rng: np.random.Generator,
    f: GfParams,
) -> tuple[ReceivedSeq, EventTrace]:
    q = f.q
    n = len(x)
    out: list[int] = []
    ins_counts = np.zeros(n, dtype=np.int64)
    ins_symbols: list[int] = []
    outcome = np.zeros(n, dtype=np.int8)
    emitted = np.full(n, -1, dtype=np.int8)

    for i in range(n):
        while True:
            u = rng.random()
            if u < ch.p_ins:
                s = int(rng.integers(q))
                out.append(s)
                ins_symbols.append(s)
                ins_counts[i] += 1
            elif u < ch.p_ins + ch.p_del:
                outcome[i] = DELETED
                break
            else:
                if rng.random() < ch.p_sub:
                    # uniform over the q-1 symbols different from x[i]
                    s = int(rng.integers(q - 1))
                    if s >= x[i]:
                        s += 1
                    outcome[i] = TRANSMITTED_SUBSTITUTED
                else:
                    s = int(x[i])
                    outcome[i] = TRANSMITTED_CLEAN
                out.append(s)
                emitted[i] = s
                break

    rec = ReceivedSeq(symbols=np.asarray(out, dtype=np.int8), source_len=n)
    trace = EventTrace(
        ins_counts=ins_counts,
        ins_symbols=np.asarray(ins_symbols, dtype=np.int8),
        outcome=outcome,
        emitted=emitted,
    )
    return rec, trace


def transmit_multi(
    x: NDArray[np.integer],
    ch: IdsChannelParams,
    m: int,
    rng: np.random.Generator,
    f: GfParams,
) -> list[tuple[ReceivedSeq, EventTrace]]:
    if m < 1:
        raise ValueError(f"copy count m={m} must be >= 1")
    return [transmit(x, ch, rng, f) for _ in range(m)]
