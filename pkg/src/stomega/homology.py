"""Sparse exact and modular linear algebra for chain complexes."""
from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import flint

from .gf_linalg import is_prime

EXACT_COLUMN_LIMIT = 2000
DENSE_CHUNK = 3000
MARKOWITZ_CAP = 400


class FormalSum(dict):
    """Sparse coefficient map; zero coefficients are never stored."""

    def add(self, key, c):
        if not c:
            return
        v = self.get(key, 0) + c
        if v:
            self[key] = v
        else:
            self.pop(key, None)

    def iadd(self, other, scale=1):
        for k, c in other.items():
            self.add(k, c * scale)
        return self

    def scaled(self, s) -> "FormalSum":
        out = FormalSum()
        if s:
            for k, c in self.items():
                out[k] = c * s
        return out

    def __add__(self, other):
        return FormalSum(self).iadd(other)

    def __sub__(self, other):
        return FormalSum(self).iadd(other, -1)

    def __neg__(self):
        return self.scaled(-1)

    def mod(self, ell: int) -> "FormalSum":
        out = FormalSum()
        for k, c in self.items():
            out.add(k, c % ell)
        return out


class SparseMat:
    """Column-major sparse matrix; ring is 'Q' (ints or Fractions) or a prime modulus."""

    def __init__(self, nrows: int, ncols: int, columns=None, ring="Q"):
        self.nrows, self.ncols, self.ring = nrows, ncols, ring
        self.columns: list[dict[int, object]] = columns if columns is not None else [dict() for _ in range(ncols)]
        if len(self.columns) != ncols:
            raise ValueError("column count mismatch")

    @classmethod
    def from_entries(cls, nrows, ncols, entries, ring="Q"):
        cols = [dict() for _ in range(ncols)]
        for r, c, v in entries:
            if (r, c) in ((r, c) for _ in ()):  # pragma: no cover
                pass
            if r in cols[c]:
                raise ValueError(f"duplicate coordinate ({r}, {c})")
            if v:
                cols[c][r] = v
        return cls(nrows, ncols, cols, ring)

    @classmethod
    def from_dense(cls, rows, ring="Q"):
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        cols = [{i: rows[i][j] for i in range(nrows) if rows[i][j]} for j in range(ncols)]
        return cls(nrows, ncols, cols, ring)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self.columns)

    def entries(self):
        for j, col in enumerate(self.columns):
            for i in sorted(col):
                yield i, j, col[i]

    def to_dense(self):
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for i, j, v in self.entries():
            out[i][j] = v
        return out

    def transpose(self) -> "SparseMat":
        cols = [dict() for _ in range(self.nrows)]
        for i, j, v in self.entries():
            cols[i][j] = v
        return SparseMat(self.ncols, self.nrows, cols, self.ring)

    def hstack(self, other: "SparseMat") -> "SparseMat":
        if other.nrows != self.nrows:
            raise ValueError("row count mismatch")
        return SparseMat(self.nrows, self.ncols + other.ncols, [dict(c) for c in self.columns + other.columns], self.ring)

    def select_columns(self, idx) -> "SparseMat":
        idx = list(idx)
        return SparseMat(self.nrows, len(idx), [dict(self.columns[j]) for j in idx], self.ring)

    def apply(self, v: dict) -> FormalSum:
        """Matrix times a sparse column vector {col: value}."""
        out = FormalSum()
        for j, x in v.items():
            for i, a in self.columns[j].items():
                out.add(i, a * x)
        if isinstance(self.ring, int):
            out = out.mod(self.ring)
        return out

    def __matmul__(self, other: "SparseMat") -> "SparseMat":
        if self.ncols != other.nrows:
            raise ValueError("inner dimensions differ")
        ring = other.ring if isinstance(other.ring, int) else self.ring
        cols = [dict(self.apply(c)) for c in other.columns]
        if isinstance(ring, int):
            cols = [{i: v % ring for i, v in c.items() if v % ring} for c in cols]
        return SparseMat(self.nrows, other.ncols, cols, ring)

    def is_zero(self) -> bool:
        if isinstance(self.ring, int):
            return all(v % self.ring == 0 for c in self.columns for v in c.values())
        return all(not v for c in self.columns for v in c.values())

    def __eq__(self, other):
        if not isinstance(other, SparseMat) or self.shape != other.shape:
            return False
        return all({i: v for i, v in a.items() if v} == {i: v for i, v in b.items() if v} for a, b in zip(self.columns, other.columns))

    def export(self) -> str:
        """Coordinate text format: 'rows cols nnz' then 'row col value' per entry."""
        ent = [(i, j, v) for i, j, v in self.entries() if v]
        lines = [f"{self.nrows} {self.ncols} {len(ent)}"]
        for i, j, v in ent:
            if isinstance(v, Fraction) and v.denominator != 1:
                s = f"{v.numerator}/{v.denominator}"
            else:
                s = str(int(v))
            lines.append(f"{i} {j} {s}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str, ring="Q") -> "SparseMat":
        lines = text.strip().splitlines()
        r, c, nnz = map(int, lines[0].split())
        ent = []
        for ln in lines[1 : 1 + nnz]:
            i, j, v = ln.split()
            x = Fraction(v)
            ent.append((int(i), int(j), int(x) if x.denominator == 1 else x))
        return cls.from_entries(r, c, ent, ring)


def _integer_columns(M: SparseMat) -> list[dict[int, int]]:
    out = []
    for col in M.columns:
        den = 1
        for v in col.values():
            if isinstance(v, Fraction):
                den = lcm(den, v.denominator)
        out.append({i: int(v * den) for i, v in col.items() if v})
    return out


def _markowitz_eliminate(cols: list[dict[int, int]], ell: int | None, cap: float, store=False):
    """Column-operation Gaussian elimination with least-fill pivots.

    ell=None runs fraction-free Bareiss over the integers (with lazily applied
    row scalings); otherwise arithmetic is mod ell. Pivots with Markowitz cost
    above `cap` are left for the caller. Returns (rank, remaining columns,
    pivot log). Ties break on (row, col) for reproducibility.
    """
    cols = [dict(c) for c in cols]
    rows: dict[int, set[int]] = {}
    for j, c in enumerate(cols):
        for i in c:
            rows.setdefault(i, set()).add(j)
    level = [0] * len(cols)
    pivvals = [1]
    heap = []
    for j, c in enumerate(cols):
        for i in c:
            heapq.heappush(heap, ((len(rows[i]) - 1) * (len(c) - 1), i, j))
    dead_rows: set[int] = set()
    dead_cols: set[int] = set()
    log = []
    rank = 0
    while heap:
        cost, i, j = heapq.heappop(heap)
        if i in dead_rows or j in dead_cols or i not in cols[j]:
            continue
        real = (len(rows[i]) - 1) * (len(cols[j]) - 1)
        if real != cost:
            heapq.heappush(heap, (real, i, j))
            continue
        if cost > cap:
            heapq.heappush(heap, (cost, i, j))
            break
        k = rank + 1
        pc = cols[j]
        if ell is None:
            prev = pivvals[-1]
            if level[j] != k - 1:
                f, d = prev, pivvals[level[j]]
                for r in pc:
                    pc[r] = pc[r] * f // d
            piv = pc[i]
        else:
            piv = pc[i]
            inv = pow(piv, ell - 2, ell)
        for j2 in sorted(rows[i]):
            if j2 == j:
                continue
            c2 = cols[j2]
            if ell is None:
                if level[j2] != k - 1:
                    f, d = prev, pivvals[level[j2]]
                    for r in c2:
                        c2[r] = c2[r] * f // d
                a = c2[i]
                keys = set(c2) | set(pc)
                for r in keys:
                    v = (piv * c2.get(r, 0) - a * pc.get(r, 0)) // prev
                    _set(c2, rows, r, j2, v, heap)
                level[j2] = k
            else:
                a = c2[i] * inv % ell
                for r, x in pc.items():
                    v = (c2.get(r, 0) - a * x) % ell
                    _set(c2, rows, r, j2, v, heap)
        for r in pc:
            rows[r].discard(j)
        if store:
            log.append((i, dict(pc)))
        dead_rows.add(i)
        dead_cols.add(j)
        if ell is None:
            pivvals.append(piv)
        rank += 1
    rest = [j for j in range(len(cols)) if j not in dead_cols and cols[j]]
    remaining = []
    for j in rest:
        c = cols[j]
        if ell is None and level[j] != rank:
            f, d = pivvals[-1], pivvals[level[j]]
            c = {r: v * f // d for r, v in c.items()}
        remaining.append({r: v for r, v in c.items() if r not in dead_rows})
    return rank, [c for c in remaining if c], log


def _set(col, rows, r, j, v, heap):
    if v:
        new = r not in col
        col[r] = v
        if new:
            rows.setdefault(r, set()).add(j)
            heapq.heappush(heap, ((len(rows[r]) - 1) * (len(col) - 1), r, j))
    elif r in col:
        del col[r]
        rows[r].discard(j)


def _bareiss_dense_rank(cols: list[dict[int, int]]) -> int:
    """Plain fraction-free elimination for whatever the sparse phase left."""
    if not cols:
        return 0
    rowset = sorted({r for c in cols for r in c})
    ri = {r: t for t, r in enumerate(rowset)}
    m = [[0] * len(cols) for _ in rowset]
    for j, c in enumerate(cols):
        for r, v in c.items():
            m[ri[r]][j] = v
    nr, nc = len(m), len(cols)
    prev, rank = 1, 0
    for c in range(nc):
        piv = next((r for r in range(rank, nr) if m[r][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        p = m[rank][c]
        for r in range(rank + 1, nr):
            a = m[r][c]
            row = m[r]
            prow = m[rank]
            for t in range(c, nc):
                row[t] = (p * row[t] - a * prow[t]) // prev
        prev = p
        rank += 1
        if rank == nr:
            break
    return rank


def _flint_rank(cols: list[dict[int, int]], ell: int) -> int:
    """Rank mod ell of a dense-ish remainder, chunking the longer side."""
    if not cols:
        return 0
    rowset = sorted({r for c in cols for r in c})
    ri = {r: t for t, r in enumerate(rowset)}
    s, n = len(rowset), len(cols)
    if s * n <= 4 * 10**7:
        A = flint.nmod_mat(s, n, ell)
        for j, c in enumerate(cols):
            for r, v in c.items():
                A[ri[r], j] = v % ell
        return A.rank()
    basis = None
    for start in range(0, n, DENSE_CHUNK):
        chunk = cols[start : start + DENSE_CHUNK]
        b = 0 if basis is None else len(basis)
        A = flint.nmod_mat(b + len(chunk), s, ell)
        for t, row in enumerate(basis or []):
            for q, v in row.items():
                A[t, q] = v
        for t, c in enumerate(chunk):
            for r, v in c.items():
                A[b + t, ri[r]] = v % ell
        R, rk = A.rref()
        basis = _sparse_rows(R, rk, s)
        if rk == s:
            break
    return len(basis)


def _sparse_rows(R, rk: int, s: int) -> list[dict[int, int]]:
    out = []
    for t in range(rk):
        row = {}
        for q in range(s):
            v = int(R[t, q])
            if v:
                row[q] = v
        out.append(row)
    return out


def rank_exact(M: SparseMat, cap: float = MARKOWITZ_CAP) -> int:
    if isinstance(M.ring, int):
        raise ValueError("exact mode needs rational coefficients")
    cols = [c for c in _integer_columns(M) if c]
    r, rest, _ = _markowitz_eliminate(cols, None, cap)
    return r + _bareiss_dense_rank(rest)


def rank_mod(M: SparseMat, ell: int, cap: float = MARKOWITZ_CAP) -> int:
    if isinstance(M.ring, int) and M.ring != ell:
        raise ValueError("matrix is over a different prime field")
    cols = []
    for c in _integer_columns(M):
        c = {i: v % ell for i, v in c.items() if v % ell}
        if c:
            cols.append(c)
    r, rest, _ = _markowitz_eliminate(cols, ell, cap)
    return r + _flint_rank(rest, ell)


def random_primes(k: int, seed: int = 0, low: int = 1 << 20, high: int = 1 << 30) -> list[int]:
    rng = random.Random(seed)
    out: list[int] = []
    while len(out) < k:
        q = rng.randrange(low, high) | 1
        if q not in out and is_prime(q):
            out.append(q)
    return out


@dataclass
class RankResult:
    rank: int
    mode: str
    primes: tuple[int, ...] = ()
    per_prime: tuple[int, ...] = ()


def rank_report(M: SparseMat, mode: str = "auto", seed: int = 0, exact_limit: int = EXACT_COLUMN_LIMIT) -> RankResult:
    if M.nrows == 0 or M.ncols == 0:
        return RankResult(0, "trivial")
    if isinstance(M.ring, int):
        return RankResult(rank_mod(M, M.ring), "field", (M.ring,), ())
    if mode == "auto":
        mode = "exact" if M.ncols <= exact_limit else "modular"
    if mode == "exact":
        return RankResult(rank_exact(M), "exact")
    if mode != "modular":
        raise ValueError(f"unknown rank mode {mode!r}")
    primes = random_primes(2, seed)
    ranks = [rank_mod(M, q) for q in primes]
    if ranks[0] != ranks[1]:
        extra = random_primes(3, seed)[2]
        primes.append(extra)
        ranks.append(rank_mod(M, extra))
    return RankResult(max(ranks), "modular", tuple(primes), tuple(ranks))


def rank(M: SparseMat, mode: str = "auto", seed: int = 0) -> int:
    return rank_report(M, mode, seed).rank


class ColumnSpace:
    """Column span of M over GF(ell), kept as a pivot log plus a dense remainder."""

    def __init__(self, M: SparseMat, ell: int, cap: float = MARKOWITZ_CAP):
        self.ell = ell
        cols = []
        for c in _integer_columns(M):
            c = {i: v % ell for i, v in c.items() if v % ell}
            if c:
                cols.append(c)
        r, rest, self.log = _markowitz_eliminate(cols, ell, cap, store=True)
        self.dense_rows: list[dict[int, int]] = []
        self.dense_piv: list[int] = []
        for c in rest:
            self._absorb(c)
        self.rank = r + len(self.dense_rows)

    def _reduce_dense(self, v: dict[int, int]) -> dict[int, int]:
        ell = self.ell
        v = dict(v)
        for p, row in zip(self.dense_piv, self.dense_rows):
            a = v.get(p, 0)
            if a:
                for q, x in row.items():
                    y = (v.get(q, 0) - a * x) % ell
                    if y:
                        v[q] = y
                    else:
                        v.pop(q, None)
        return v

    def _absorb(self, v: dict[int, int]):
        v = self._reduce_dense(v)
        if not v:
            return
        ell = self.ell
        p = min(v)
        inv = pow(v[p], ell - 2, ell)
        v = {q: x * inv % ell for q, x in v.items()}
        for t, row in enumerate(self.dense_rows):
            a = row.get(p, 0)
            if a:
                for q, x in v.items():
                    y = (row.get(q, 0) - a * x) % ell
                    if y:
                        row[q] = y
                    else:
                        row.pop(q, None)
        self.dense_rows.append(v)
        self.dense_piv.append(p)

    def residual(self, v) -> dict[int, int]:
        ell = self.ell
        v = {i: x % ell for i, x in dict(v).items() if x % ell}
        for i, col in self.log:
            a = v.get(i, 0)
            if a:
                f = a * pow(col[i], ell - 2, ell) % ell
                for r, x in col.items():
                    y = (v.get(r, 0) - f * x) % ell
                    if y:
                        v[r] = y
                    else:
                        v.pop(r, None)
        return self._reduce_dense(v)

    def contains(self, v) -> bool:
        return not self.residual(v)


def in_image(M: SparseMat, v, mode: str = "auto", seed: int = 0) -> bool:
    """Is v (dense list or {row: value}) in the column span of M?"""
    if not isinstance(v, dict):
        if len(v) != M.nrows:
            raise ValueError("vector length differs from row count")
        v = {i: x for i, x in enumerate(v) if x}
    elif v and max(v) >= M.nrows:
        raise ValueError("vector index out of range")
    if not v:
        return True
    aug = M.hstack(SparseMat(M.nrows, 1, [dict(v)], M.ring))
    if mode == "auto":
        mode = "exact" if M.ncols <= EXACT_COLUMN_LIMIT else "modular"
    if mode == "exact":
        return rank_exact(aug) == rank_exact(M)
    return all(ColumnSpace(M, q).contains(v) for q in random_primes(2, seed))


@dataclass
class ChainComplex:
    """Graded bases with boundaries d[k]: C_k -> C_{k-1}.

    `top` is the highest degree known to be nonzero; degrees above `window`
    were never materialized. Reduced complexes carry degree -1.
    """

    bases: dict[int, list]
    boundaries: dict[int, SparseMat]
    ring: object = "Q"
    window: int | None = None
    index: dict[int, dict] = field(default_factory=dict)

    def __post_init__(self):
        for k, b in self.bases.items():
            self.index.setdefault(k, {g: i for i, g in enumerate(b)})

    def dim(self, k: int) -> int:
        return len(self.bases.get(k, []))

    def boundary(self, k: int) -> SparseMat:
        if k in self.boundaries:
            return self.boundaries[k]
        if self.window is not None and k > self.window:
            raise KeyError(f"degree {k} lies outside the materialized window")
        return SparseMat(self.dim(k - 1), self.dim(k), ring=self.ring)

    def vector(self, k: int, chain: dict) -> dict[int, int]:
        idx = self.index[k]
        return {idx[g]: c for g, c in chain.items() if c}


def betti(C: ChainComplex, k: int, mode: str = "auto", seed: int = 0) -> int:
    if C.window is not None and k + 1 > C.window:
        raise KeyError(f"betti in degree {k} needs degree {k + 1}, outside window {C.window}")
    if k not in C.bases and C.dim(k) == 0:
        return 0
    dk = C.boundary(k)
    dk1 = C.boundary(k + 1)
    return C.dim(k) - rank(dk, mode, seed) - rank(dk1, mode, seed)


def pivot_columns(M: SparseMat, ell: int) -> list[int]:
    """Greedy (leftmost) independent columns of M mod ell."""
    if M.ncols == 0 or M.nrows == 0:
        return []
    A = flint.nmod_mat(M.nrows, M.ncols, ell)
    for j, c in enumerate(_integer_columns(M)):
        for i, v in c.items():
            if v % ell:
                A[i, j] = v % ell
    R, rk = A.rref()
    piv = []
    col = 0
    for t in range(rk):
        while not int(R[t, col]):
            col += 1
        piv.append(col)
    return piv


@dataclass
class HomologyBasis:
    """Coordinates on H_k: a cycle z maps to z|free - corr * z|bpiv.

    `free` indexes the non-pivot columns of d_k (a coordinate system on the
    cycles); boundaries are quotiented out through the RREF of their
    restriction. With no incoming boundaries the projector is integral.
    """

    degree: int
    free: list[int]
    keep: list[int]
    bpiv: list[int]
    corr: list[dict[int, int]]
    ell: int | None
    cycle_basis: list[dict[int, int]] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.keep)

    def project(self, z: dict) -> tuple[int, ...]:
        y = [z.get(self.free[q], 0) for q in self.keep]
        if self.corr:
            for t, c in enumerate(self.bpiv):
                a = z.get(self.free[c], 0)
                if a:
                    for q, x in self.corr[t].items():
                        y[q] -= a * x
        if self.ell is not None:
            y = [v % self.ell for v in y]
        return tuple(y)


def homology_coords(C: ChainComplex, k: int, ell: int | None = None, seed: int = 0) -> HomologyBasis:
    """Coordinates on H_k(C). Integral when nothing maps into degree k."""
    q = ell or random_primes(1, seed)[0]
    dk = C.boundary(k)
    piv = set(pivot_columns(dk, q))
    free = [j for j in range(C.dim(k)) if j not in piv]
    pos = {j: t for t, j in enumerate(free)}
    dk1 = C.boundary(k + 1)
    bcols = []
    for col in dk1.columns:
        bcols.append({pos[i]: v for i, v in col.items() if v % q})
    if not any(bcols):
        basis = _cycle_basis(dk, free, piv, q)
        return HomologyBasis(k, free, list(range(len(free))), [], [], ell, basis)
    B = SparseMat(len(free), len(bcols), bcols)
    bp = pivot_columns(B.transpose(), q)
    # RREF rows of the boundary span inside free-coordinates
    A = flint.nmod_mat(len(bcols), len(free), q)
    for j, c in enumerate(bcols):
        for i, v in c.items():
            A[j, i] = v % q
    R, rk = A.rref()
    keep = [t for t in range(len(free)) if t not in set(bp)]
    kpos = {t: s for s, t in enumerate(keep)}
    corr = []
    for t in range(rk):
        row = {}
        for c in keep:
            v = int(R[t, c])
            if v:
                row[kpos[c]] = v
        corr.append(row)
    return HomologyBasis(k, free, keep, bp, corr, q)


def _cycle_basis(dk: SparseMat, free, piv, q) -> list[dict[int, int]]:
    """Kernel vectors with identity on the free columns (mod q)."""
    if len(free) > 400:
        return []
    A = flint.nmod_mat(max(dk.nrows, 1), dk.ncols, q)
    for j, c in enumerate(dk.columns):
        for i, v in c.items():
            A[i, j] = v % q
    R, rk = A.rref()
    pivs = sorted(piv)
    out = []
    for f in free:
        z = {f: 1}
        for t, c in enumerate(pivs):
            v = int(R[t, f])
            if v:
                z[c] = (-v) % q
        out.append(z)
    return out


def snf_small(M: SparseMat) -> list[int]:
    """Nonzero Smith invariant factors of a small integer matrix."""
    if M.nrows * M.ncols > 40000:
        raise ValueError("matrix too large for Smith normal form; use rank mode")
    A = [[int(x) for x in row] for row in M.to_dense()]
    m, n = M.nrows, M.ncols
    out = []
    t = 0
    while t < min(m, n):
        nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                    if A[i][t]:
                        done = False
                        if abs(A[i][t]) < abs(A[t][t]):
                            A[t], A[i] = A[i], A[t]
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    for row in A:
                        row[j] -= q * row[t]
                    if A[t][j]:
                        done = False
                        if abs(A[t][j]) < abs(A[t][t]):
                            for row in A:
                                row[t], row[j] = row[j], row[t]
            if done:
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % A[t][t]), None)
                if bad is None:
                    break
                A[t] = [a + b for a, b in zip(A[t], A[bad[0]])]
        out.append(abs(A[t][t]))
        t += 1
    return out
