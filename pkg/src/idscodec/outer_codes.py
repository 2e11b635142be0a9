"""Linear block codes over GF(q): alist I/O, protograph lifting, encoding.

The alist layout follows the usual LDPC database convention. For nonbinary
codes we use a documented extension where every neighbor entry is an
"index weight" pair instead of a bare index (see `parse_alist`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np
from numpy.typing import NDArray

from .channel import make_rng
from .galois import GfParams, gf, gf_matvec, gf_vecmat


class AlistParseError(ValueError):
    pass


class RankError(ValueError):
    pass


class LiftingError(RuntimeError):
    pass


@dataclass(frozen=True)
class LinearBlockCode:
    field: GfParams
    gen: NDArray[np.uint8]  # k x n_out, original column order
    pcm: NDArray[np.uint8]  # (n_out - k) x n_out
    message_cols: NDArray[np.int64]  # systematic positions of the k message symbols

    @property
    def k(self) -> int:
        return self.gen.shape[0]

    @property
    def n_out(self) -> int:
        return self.gen.shape[1]

    def encode(self, msg: NDArray[np.integer]) -> NDArray[np.uint8]:
        if len(msg) != self.k:
            raise ValueError(f"message length {len(msg)} != k={self.k}")
        return gf_vecmat(np.asarray(msg, dtype=np.uint8), self.gen, self.field)

    def syndrome(self, word: NDArray[np.integer]) -> NDArray[np.uint8]:
        if len(word) != self.n_out:
            raise ValueError(f"word length {len(word)} != n_out={self.n_out}")
        return gf_matvec(self.pcm, np.asarray(word, dtype=np.uint8), self.field)


def _rref(h: NDArray[np.uint8], f: GfParams) -> tuple[NDArray[np.uint8], list[int]]:
    """Reduced row echelon form over GF(q); returns (rref, pivot columns)."""
    a = h.astype(np.uint8).copy()
    m, n = a.shape
    mul, inv = f.mul_table, f.inv_table
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        rows = np.nonzero(a[r:, c])[0]
        if len(rows) == 0:
            continue
        pr = r + rows[0]
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
        if a[r, c] != 1:
            a[r] = mul[inv[a[r, c]], a[r]]
        for other in range(m):
            if other != r and a[other, c] != 0:
                a[other] ^= mul[a[other, c], a[r]]
        pivots.append(c)
        r += 1
    return a, pivots


def from_pcm(h: NDArray[np.integer], f: GfParams) -> LinearBlockCode:
    """Derive a systematic generator from a full-rank parity-check matrix."""
    h = np.asarray(h, dtype=np.uint8)
    m, n = h.shape
    rref, pivots = _rref(h, f)
    if len(pivots) < m:
        raise RankError(f"parity-check matrix has rank {len(pivots)} < {m}")
    k = n - m
    message_cols = np.array([c for c in range(n) if c not in set(pivots)], dtype=np.int64)
    # H restricted to [message | pivot] columns is [B | I]; G is [I | B^T] there
    b = rref[:, message_cols]
    gen = np.zeros((k, n), dtype=np.uint8)
    gen[np.arange(k), message_cols] = 1
    gen[:, np.array(pivots, dtype=np.int64)] = b.T
    assert not gf_matvec(h, gen[0], f).any() or k == 0
    return LinearBlockCode(field=f, gen=gen, pcm=h, message_cols=message_cols)


def parse_alist(text: str, f: GfParams | None = None) -> LinearBlockCode:
    """Parse an alist file (binary, or the weighted nonbinary extension).

    Binary: standard alist. Nonbinary: the header gains a third value q on
    line one, and every neighbor entry in the index lists becomes an
    "index weight" pair.
    """
    tokens = text.split()
    pos = 0

    def take(count: int) -> list[int]:
        nonlocal pos
        if pos + count > len(tokens):
            raise AlistParseError("truncated alist")
        vals = tokens[pos : pos + count]
        pos += count
        try:
            return [int(v) for v in vals]
        except ValueError as e:
            raise AlistParseError(f"non-integer token in alist: {e}") from e

    first_line = text.lstrip().splitlines()[0].split()
    nonbinary = len(first_line) == 3
    if nonbinary:
        n, m, q = take(3)
        if f is None:
            f = gf(int(q).bit_length() - 1)
        if f.q != q:
            raise AlistParseError(f"alist field order {q} != requested {f.q}")
    else:
        n, m = take(2)
        if f is None:
            f = gf(1)
    if n <= 0 or m <= 0 or m >= n:
        raise AlistParseError(f"bad dimensions n={n}, m={m}")
    max_col, max_row = take(2)
    col_deg = take(n)
    row_deg = take(m)
    if max(col_deg) != max_col or max(row_deg) != max_row:
        raise AlistParseError("degree lists inconsistent with stated maxima")
    if sum(col_deg) != sum(row_deg):
        raise AlistParseError("column and row degree sums differ")
    if min(row_deg) == 0 or min(col_deg) == 0:
        raise RankError("zero-degree row or column")

    h = np.zeros((m, n), dtype=np.uint8)
    step = 2 if nonbinary else 1
    for j in range(n):
        entries = take(max_col * step)
        for d in range(col_deg[j]):
            idx = entries[d * step] - 1
            w = entries[d * step + 1] if nonbinary else 1
            if not 0 <= idx < m:
                raise AlistParseError(f"row index {idx + 1} out of range in column {j + 1}")
            if nonbinary and not 1 <= w < f.q:
                raise AlistParseError(f"edge weight {w} outside field")
            h[idx, j] = w
    # per-row lists are redundant; verify consistency
    for i in range(m):
        entries = take(max_row * step)
        for d in range(row_deg[i]):
            idx = entries[d * step] - 1
            if h[i, idx] == 0:
                raise AlistParseError(f"row list names absent entry ({i + 1}, {idx + 1})")
    return from_pcm(h, f)


def write_alist(code: LinearBlockCode) -> str:
    h = code.pcm
    f = code.field
    m, n = h.shape
    nonbinary = f.q > 2
    col_lists = [np.nonzero(h[:, j])[0] for j in range(n)]
    row_lists = [np.nonzero(h[i, :])[0] for i in range(m)]
    max_col = max(len(c) for c in col_lists)
    max_row = max(len(r) for r in row_lists)
    lines = []
    lines.append(f"{n} {m} {f.q}" if nonbinary else f"{n} {m}")
    lines.append(f"{max_col} {max_row}")
    lines.append(" ".join(str(len(c)) for c in col_lists))
    lines.append(" ".join(str(len(r)) for r in row_lists))

    def fmt(idx_list, weights, width):
        toks = []
        for idx, w in zip(idx_list, weights):
            toks.append(f"{idx + 1} {w}" if nonbinary else f"{idx + 1}")
        pad = "0 0" if nonbinary else "0"
        toks.extend([pad] * (width - len(idx_list)))
        return " ".join(toks)

    for j in range(n):
        lines.append(fmt(col_lists[j], h[col_lists[j], j], max_col))
    for i in range(m):
        lines.append(fmt(row_lists[i], h[i, row_lists[i]], max_row))
    return "\n".join(lines) + "\n"


def builtin_code(name: str, f: GfParams | None = None) -> LinearBlockCode:
    """Load one of the shipped code instances by name.

    Available: "ldpc_96_48" (binary), "ldpc_q4_64_32" (quaternary),
    "hamming_7_4" (binary).
    """
    ref = resources.files("idscodec").joinpath(f"data/{name}.alist")
    try:
        text = ref.read_text()
    except FileNotFoundError as e:
        raise ValueError(f"no builtin code named {name!r}") from e
    return parse_alist(text, f)


@dataclass(frozen=True)
class Protograph:
    entries: NDArray[np.int64]

    def __post_init__(self):
        e = self.entries
        if (e < 0).any():
            raise ValueError("protograph entries must be non-negative")
        if (e.sum(axis=0) == 0).any() or (e.sum(axis=1) == 0).any():
            raise ValueError("every protograph row and column needs an edge")

    @staticmethod
    def from_json(text: str) -> "Protograph":
        return Protograph(np.asarray(json.loads(text), dtype=np.int64))


def _has_4cycle(h_support: NDArray[np.integer]) -> bool:
    overlap = (h_support.astype(np.int64) @ h_support.T.astype(np.int64))
    np.fill_diagonal(overlap, 0)
    return bool((overlap > 1).any())


def tanner_girth(h: NDArray[np.integer], cap: int = 12) -> int:
    """Shortest cycle length of the Tanner graph via BFS, capped for speed."""
    m, n = h.shape
    adj: list[list[int]] = [[] for _ in range(m + n)]  # checks 0..m-1, vars m..m+n-1
    for i, j in zip(*np.nonzero(h)):
        adj[i].append(m + j)
        adj[m + j].append(int(i))
    best = cap + 1
    for src in range(m):
        dist = {src: 0}
        parent = {src: -1}
        queue = [src]
        while queue:
            u = queue.pop(0)
            if dist[u] * 2 >= best:
                break
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    queue.append(v)
                elif parent[u] != v:
                    best = min(best, dist[u] + dist[v] + 1)
        if best == 4:
            return 4
    return best if best <= cap else cap + 1


def lift_protograph(
    p: Protograph,
    lift: int,
    rng: np.random.Generator,
    f: GfParams | None = None,
    max_retries: int = 100,
) -> LinearBlockCode:
    """Expand each protograph edge into a circulant permutation block.

    Parallel edges get distinct shifts; the construction is retried with
    fresh shifts whenever blocks collide, a 4-cycle appears, or the lifted
    matrix loses rank.
    """
    if lift < 1:
        raise ValueError(f"lift factor {lift} must be >= 1")
    f = f or gf(1)
    mp, np_ = p.entries.shape
    for _ in range(max_retries):
        h = np.zeros((mp * lift, np_ * lift), dtype=np.int64)
        ok = True
        for i in range(mp):
            for j in range(np_):
                t = p.entries[i, j]
                if t == 0:
                    continue
                if t > lift:
                    raise LiftingError(f"multiplicity {t} exceeds lift factor {lift}")
                shifts = rng.choice(lift, size=t, replace=False)
                for s in shifts:
                    rows = i * lift + np.arange(lift)
                    cols = j * lift + (np.arange(lift) + s) % lift
                    h[rows, cols] += 1
        if (h > 1).any():
            continue  # parallel-edge collision
        if _has_4cycle(h):
            ok = False
        if not ok:
            continue
        hq = h.astype(np.uint8)
        if f.q > 2:
            weights = rng.integers(1, f.q, size=int(hq.sum()))
            hq[hq > 0] = weights.astype(np.uint8)
        try:
            return from_pcm(hq, f)
        except RankError:
            continue
    raise LiftingError(f"no valid lift found after {max_retries} attempts")
