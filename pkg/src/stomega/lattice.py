"""Integer-indexed lines and subspaces with memoized joins, perps and projections.

Every hot loop (Sharbly spans, split terms, flag complexes) works on line
indices in the global order and on subspace ids issued here.
"""
from __future__ import annotations

from functools import lru_cache

from .gf_linalg import DEFAULT_BUDGET, Line, Subspace, enumerate_lines, normalize, rref
from .symplectic import (
    SymplecticSpace,
    complete_hyperbolic,
    genus,
    intersect,
    is_isotropic,
    omega,
    perp,
    project_vector,
)


class Lattice:
    """Lines and subspaces of F_p^dim, optionally with the standard symplectic form."""

    def __init__(self, dim: int, p: int, symplectic: bool = False, budget: int = DEFAULT_BUDGET):
        self.dim, self.p = dim, p
        self.space = SymplecticSpace(dim // 2, p) if symplectic else None
        self.lines: list[Line] = enumerate_lines(dim, p, budget)
        self.reps = [l.rep for l in self.lines]
        self.line_index = {r: i for i, r in enumerate(self.reps)}
        self._subs: list[Subspace] = []
        self._sub_id: dict[tuple, int] = {}
        self._join: dict[tuple[int, int], int] = {}
        self._lines_in: dict[int, tuple[int, ...]] = {}
        self._genus: dict[int, int] = {}
        self._perp: dict[int, int] = {}
        self._meet: dict[tuple[int, int], int] = {}
        self._proj: dict[int, list[int]] = {}
        self.zero = self.sid(Subspace((), dim, p))
        self.full = self.sid(rref([tuple(int(i == j) for j in range(dim)) for i in range(dim)], p))
        self._line_sub = [self.sid(Subspace((r,), dim, p)) for r in self.reps]
        if symplectic:
            S = self.space
            self.pairing = [[omega(a, b, S) for b in self.reps] for a in self.reps]

    # subspace registry
    def sid(self, W: Subspace) -> int:
        i = self._sub_id.get(W.basis)
        if i is None:
            i = len(self._subs)
            self._subs.append(W)
            self._sub_id[W.basis] = i
        return i

    def sub(self, i: int) -> Subspace:
        return self._subs[i]

    def dim_of(self, i: int) -> int:
        return len(self._subs[i].basis)

    def line_sub(self, l: int) -> int:
        return self._line_sub[l]

    def line_of(self, v) -> int:
        return self.line_index[normalize(v, self.p)]

    def join(self, s: int, l: int) -> int:
        key = (s, l)
        r = self._join.get(key)
        if r is None:
            W = self._subs[s]
            r = self.sid(rref(list(W.basis) + [self.reps[l]], self.p, self.dim))
            self._join[key] = r
        return r

    def span(self, lines) -> int:
        s = self.zero
        for l in lines:
            s = self.join(s, l)
        return s

    def lines_in(self, s: int) -> tuple[int, ...]:
        r = self._lines_in.get(s)
        if r is None:
            W = self._subs[s]
            found = []
            for v in W.vectors():
                first = next((x for x in v if x), 0)
                if first == 1:
                    found.append(self.line_index[v])
            r = tuple(sorted(found))
            self._lines_in[s] = r
        return r

    def subspaces_in(self, s: int) -> list[int]:
        """Every subspace of s (including 0 and s), sorted by (dim, basis)."""
        seen = {self.zero}
        frontier = [self.zero]
        lines = self.lines_in(s)
        while frontier:
            nxt = []
            for t in frontier:
                for l in lines:
                    u = self.join(t, l)
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
            frontier = nxt
        return sorted(seen, key=self.order_key)

    def order_key(self, s: int):
        W = self._subs[s]
        return (len(W.basis), W.basis)

    def contains(self, big: int, small: int) -> bool:
        return self.meet(big, small) == small

    def meet(self, a: int, b: int) -> int:
        key = (a, b) if a <= b else (b, a)
        r = self._meet.get(key)
        if r is None:
            r = self.sid(intersect(self._subs[a], self._subs[b]))
            self._meet[key] = r
        return r

    # form-aware operations
    def genus(self, s: int) -> int:
        r = self._genus.get(s)
        if r is None:
            r = genus(self._subs[s], self.space)
            self._genus[s] = r
        return r

    def is_symplectic(self, s: int) -> bool:
        return self.dim_of(s) > 0 and 2 * self.genus(s) == self.dim_of(s)

    def is_isotropic(self, s: int) -> bool:
        return self.genus(s) == 0

    def perp(self, s: int) -> int:
        r = self._perp.get(s)
        if r is None:
            r = self.sid(perp(self._subs[s], self.space))
            self._perp[s] = r
        return r

    def project(self, x: int, l: int) -> int:
        """Line index of the projection of line l along symplectic x onto x-perp; -1 if l lies in x."""
        table = self._proj.get(x)
        if table is None:
            hyp = complete_hyperbolic(self._subs[x], self.space)
            table = []
            for rep in self.reps:
                v = project_vector(rep, hyp, self.space)
                table.append(self.line_index[normalize(v, self.p)] if any(v) else -1)
            self._proj[x] = table
        return table[l]

    def hyperbolic_basis(self, s: int) -> list[tuple[int, ...]]:
        return complete_hyperbolic(self._subs[s], self.space)

    def symplectic_subspaces(self, g: int, within: int | None = None) -> list[int]:
        within = self.full if within is None else within
        return [s for s in self.subspaces_in(within) if self.dim_of(s) == 2 * g and self.genus(s) == g]

    def decompositions(self, signature, within: int | None = None) -> list[tuple[int, ...]]:
        """Ordered perpendicular decompositions of `within` (default V) with the given genera."""
        within = self.full if within is None else within
        signature = tuple(signature)
        if not signature or any(g < 1 for g in signature) or 2 * sum(signature) != self.dim_of(within):
            raise ValueError(f"signature {signature} does not partition the space")
        if len(signature) == 1:
            return [(within,)]
        out = []
        for W in self.symplectic_subspaces(signature[0], within):
            rest = self.meet(within, self.perp(W))
            for tail in self.decompositions(signature[1:], rest):
                out.append((W,) + tail)
        return out

    # group action
    def line_action(self, A) -> list[int]:
        p = self.p
        out = []
        for r in self.reps:
            v = tuple(sum(a * x for a, x in zip(row, r)) % p for row in A)
            out.append(self.line_index[normalize(v, p)])
        return out

    def sub_action(self, A, s: int) -> int:
        p = self.p
        W = self._subs[s]
        return self.sid(rref([tuple(sum(a * x for a, x in zip(row, r)) % p for row in A) for r in W.basis], p, self.dim))


@lru_cache(maxsize=None)
def symplectic_lattice(n: int, p: int) -> Lattice:
    return Lattice(2 * n, p, symplectic=True)


@lru_cache(maxsize=None)
def linear_lattice(dim: int, p: int) -> Lattice:
    return Lattice(dim, p)


def lattice_for(W: Subspace, symplectic: bool = False) -> Lattice:
    if symplectic:
        return symplectic_lattice(W.ambient // 2, W.p)
    return linear_lattice(W.ambient, W.p)
