"""Arithmetic over GF(2^p) via precomputed tables.

Only small fields are needed here (binary and quaternary transmissions),
but construction works for any p <= 8.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

# x^2 + x + 1, the only irreducible quadratic over GF(2)
GF4_PRIM_POLY = 0b111
GF2_PRIM_POLY = 0b10  # x

_FIELD_CACHE: dict[tuple[int, int], "GfParams"] = {}


def _poly_mul_mod(a: int, b: int, prim_poly: int, p: int) -> int:
    """Carry-less polynomial product of a and b, reduced modulo prim_poly."""
    res = 0
    while b:
        if b & 1:
            res ^= a
        b >>= 1
        a <<= 1
        if a >> p:
            a ^= prim_poly
    return res


def _is_irreducible(poly: int, degree: int) -> bool:
    """Exhaustive trial division over GF(2), adequate for degree <= 8."""
    if degree < 1:
        return False
    for d in range(1, degree // 2 + 1):
        for divisor in range(1 << d, 1 << (d + 1)):
            rem = poly
            # long division of rem by divisor
            while rem.bit_length() >= divisor.bit_length():
                rem ^= divisor << (rem.bit_length() - divisor.bit_length())
            if rem == 0:
                return False
    return True


@dataclass(frozen=True)
class GfParams:
    """A finite field GF(2^p) with immutable lookup tables."""

    p: int
    prim_poly: int
    q: int = field(init=False)
    mul_table: NDArray[np.uint8] = field(init=False, repr=False, compare=False)
    inv_table: NDArray[np.uint8] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.p < 1 or self.p > 8:
            raise ValueError(f"extension degree p={self.p} outside supported range [1, 8]")
        if self.prim_poly.bit_length() != self.p + 1:
            raise ValueError(
                f"primitive polynomial 0b{self.prim_poly:b} does not have degree {self.p}"
            )
        if self.p > 1 and not _is_irreducible(self.prim_poly, self.p):
            raise ValueError(f"polynomial 0b{self.prim_poly:b} is reducible over GF(2)")
        q = 1 << self.p
        object.__setattr__(self, "q", q)

        mul = np.zeros((q, q), dtype=np.uint8)
        for a in range(q):
            for b in range(q):
                mul[a, b] = _poly_mul_mod(a, b, self.prim_poly, self.p)
        inv = np.zeros(q, dtype=np.uint8)
        for a in range(1, q):
            for b in range(1, q):
                if mul[a, b] == 1:
                    inv[a] = b
                    break
        mul.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "mul_table", mul)
        object.__setattr__(self, "inv_table", inv)

    def validate(self, value: int) -> None:
        if not 0 <= value < self.q:
            raise ValueError(f"symbol {value} outside field of order {self.q}")


def gf(p: int, prim_poly: int | None = None) -> GfParams:
    """Return a (cached) field instance; defaults cover GF(2) and GF(4)."""
    if prim_poly is None:
        defaults = {1: GF2_PRIM_POLY, 2: GF4_PRIM_POLY, 8: 0x11D}
        if p not in defaults:
            raise ValueError(f"no default primitive polynomial for p={p}")
        prim_poly = defaults[p]
    key = (p, prim_poly)
    if key not in _FIELD_CACHE:
        _FIELD_CACHE[key] = GfParams(p=p, prim_poly=prim_poly)
    return _FIELD_CACHE[key]


def gf_add(a: int, b: int, f: GfParams) -> int:
    f.validate(a)
    f.validate(b)
    return a ^ b


def gf_mul(a: int, b: int, f: GfParams) -> int:
    f.validate(a)
    f.validate(b)
    return int(f.mul_table[a, b])


def gf_inv(a: int, f: GfParams) -> int:
    f.validate(a)
    if a == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse")
    return int(f.inv_table[a])


def gf_matvec(mat: NDArray[np.integer], vec: NDArray[np.integer], f: GfParams) -> NDArray[np.uint8]:
    """mat @ vec over GF(q)."""
    if mat.shape[1] != vec.shape[0]:
        raise ValueError(f"shape mismatch: {mat.shape} @ {vec.shape}")
    prods = f.mul_table[mat, np.broadcast_to(vec, mat.shape)]
    return np.bitwise_xor.reduce(prods, axis=1)


def gf_vecmat(vec: NDArray[np.integer], mat: NDArray[np.integer], f: GfParams) -> NDArray[np.uint8]:
    """vec @ mat over GF(q)."""
    if vec.shape[0] != mat.shape[0]:
        raise ValueError(f"shape mismatch: {vec.shape} @ {mat.shape}")
    prods = f.mul_table[mat, vec[:, None]]
    return np.bitwise_xor.reduce(prods, axis=0)
