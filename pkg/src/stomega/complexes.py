"""Tits buildings, line complexes, chain complexes and apartment cycles."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

from .gf_linalg import DEFAULT_BUDGET, ResourceError, Subspace, normalize
from .homology import ChainComplex, FormalSum, SparseMat
from .lattice import Lattice


def sort_with_sign(seq) -> tuple[tuple, int]:
    """Sorted tuple and the parity sign of the sorting permutation; 0 on repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return tuple(sorted(seq)), 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return tuple(sorted(seq)), sign


@dataclass
class SimplicialComplex:
    """Vertices in orientation order; simplices[k] holds sorted index tuples.

    `member` is the simplex predicate (on vertex-index tuples); complexes too
    large to list are materialized only up to `window`.
    """

    vertices: list
    simplices: dict[int, list[tuple[int, ...]]]
    member: Callable[[tuple[int, ...]], bool] | None = None
    window: int | None = None
    name: str = ""
    _index: dict[int, dict] = field(default_factory=dict, repr=False)

    def index(self, k: int) -> dict:
        if k not in self._index:
            self._index[k] = {s: i for i, s in enumerate(self.simplices.get(k, []))}
        return self._index[k]

    def contains(self, simplex) -> bool:
        s = tuple(simplex)
        if self.member is not None:
            return len(set(s)) == len(s) and self.member(tuple(sorted(s)))
        return tuple(sorted(s)) in self.index(len(s) - 1)

    @property
    def dimension(self) -> int:
        return max((k for k, v in self.simplices.items() if v), default=-1)

    def count(self, k: int) -> int:
        return len(self.simplices.get(k, []))


def _flag_complex(vertices: list[int], less: Callable[[int, int], bool], budget: int) -> dict[int, list[tuple[int, ...]]]:
    """Chains of a poset whose vertex list is a linear extension."""
    n = len(vertices)
    up = [[j for j in range(i + 1, n) if less(vertices[i], vertices[j])] for i in range(n)]
    simplices: dict[int, list[tuple[int, ...]]] = {0: [(i,) for i in range(n)]} if n else {}
    level = simplices.get(0, [])
    total = n
    k = 0
    while level:
        nxt = []
        for s in level:
            for j in up[s[-1]]:
                nxt.append(s + (j,))
        total += len(nxt)
        if total > budget:
            raise ResourceError("flag complex exceeds budget")
        k += 1
        if nxt:
            nxt.sort()
            simplices[k] = nxt
        level = nxt
    return simplices


def build_tits(lat: Lattice, within: int | None = None, budget: int = DEFAULT_BUDGET) -> SimplicialComplex:
    """Flags of proper nonzero subspaces of `within` (default the whole space)."""
    W = lat.full if within is None else within
    if lat.dim_of(W) < 2:
        raise ValueError("building needs dimension at least 2")
    verts = [s for s in lat.subspaces_in(W) if s != lat.zero and s != W]
    simp = _flag_complex(verts, lambda a, b: lat.dim_of(a) < lat.dim_of(b) and lat.contains(b, a), budget)
    return SimplicialComplex(verts, simp, name="T")


def build_symplectic_tits(lat: Lattice, within: int | None = None, budget: int = DEFAULT_BUDGET) -> SimplicialComplex:
    """Flags of nonzero isotropic subspaces of a symplectic `within`."""
    W = lat.full if within is None else within
    verts = [s for s in lat.subspaces_in(W) if s != lat.zero and lat.is_isotropic(s)]
    simp = _flag_complex(verts, lambda a, b: lat.dim_of(a) < lat.dim_of(b) and lat.contains(b, a), budget)
    return SimplicialComplex(verts, simp, name="Tw")


def line_predicate(lat: Lattice, kind: str, within: int | None = None):
    """Simplex predicate on sorted line tuples for K, L or I<g> ('I0', 'I1', ...)."""
    W = lat.full if within is None else within
    if kind == "K":
        return lambda s: True
    if kind == "L":
        return lambda s: lat.span(s) != W
    if kind.startswith("I"):
        g = int(kind[1:])
        return lambda s: lat.genus(lat.span(s)) <= g
    raise ValueError(f"unknown line complex kind {kind!r}")


def build_line_complex(lat: Lattice, kind: str, max_dim: int | None = None, within: int | None = None,
                       budget: int = DEFAULT_BUDGET) -> SimplicialComplex:
    """Complex on the lines of `within`; materialized up to max_dim.

    K is never listed in full: max_dim is mandatory for it.
    """
    W = lat.full if within is None else within
    lines = list(lat.lines_in(W))
    pred = line_predicate(lat, kind, W)
    if kind == "K" and max_dim is None:
        raise ResourceError("the full simplex K is only materialized in a bounded window")
    pos = {l: i for i, l in enumerate(lines)}
    member = lambda s: pred(tuple(lines[i] for i in s))
    simplices: dict[int, list[tuple[int, ...]]] = {0: [(i,) for i in range(len(lines)) if member((i,))]}
    level = simplices[0]
    total = len(level)
    k = 0
    while level and (max_dim is None or k < max_dim):
        nxt = []
        for s in level:
            for j in range(s[-1] + 1, len(lines)):
                t = s + (j,)
                if member(t):
                    nxt.append(t)
        total += len(nxt)
        if total > budget:
            raise ResourceError("line complex exceeds budget")
        k += 1
        if not nxt:
            break
        simplices[k] = nxt
        level = nxt
    window = max_dim if (max_dim is not None and level and k == max_dim) else None
    X = SimplicialComplex(lines, simplices, member=member, window=window, name=kind)
    X.line_pos = pos
    return X


def _boundary_matrix(X: SimplicialComplex, k: int, skip=frozenset()) -> SparseMat:
    rows = [s for s in X.simplices.get(k - 1, []) if s not in skip]
    ridx = {s: i for i, s in enumerate(rows)}
    cols = []
    for s in X.simplices.get(k, []):
        if s in skip:
            continue
        col = {}
        for i in range(len(s)):
            face = s[:i] + s[i + 1:]
            if face in ridx:
                col[ridx[face]] = -1 if i % 2 else 1
        cols.append(col)
    return SparseMat(len(rows), len(cols), cols)


def chain_complex(X: SimplicialComplex, ring="Q", reduced: bool = True) -> ChainComplex:
    """Simplicial chains; with `reduced`, an augmentation to degree -1."""
    bases = {k: list(v) for k, v in X.simplices.items()}
    bounds = {k: _boundary_matrix(X, k) for k in bases if k >= 1}
    if reduced:
        bases[-1] = [()]
        bounds[0] = SparseMat(1, len(bases.get(0, [])), [{0: 1} for _ in bases.get(0, [])])
    return ChainComplex(bases, bounds, ring, window=X.window)


def relative_chain_complex(X: SimplicialComplex, Y: SimplicialComplex, ring="Q") -> ChainComplex:
    """Chains of X modulo the subcomplex Y (same vertex list)."""
    if list(X.vertices) != list(Y.vertices):
        raise ValueError("subcomplex must share the vertex list")
    skip = set()
    for k, ss in Y.simplices.items():
        if X.window is not None and k > X.window:
            continue
        for s in ss:
            if not X.contains(s):
                raise ValueError(f"simplex {s} of Y is not in X")
            skip.add(s)
    bases = {k: [s for s in v if s not in skip] for k, v in X.simplices.items()}
    bounds = {k: _boundary_matrix(X, k, skip) for k in bases if k >= 1}
    window = X.window if Y.window is None else min(X.window if X.window is not None else Y.window, Y.window)
    return ChainComplex(bases, bounds, ring, window=window)


def chain_boundary(chain: dict) -> FormalSum:
    """Boundary of a chain keyed by vertex tuples (in orientation order)."""
    out = FormalSum()
    for s, c in chain.items():
        for i in range(len(s)):
            out.add(s[:i] + s[i + 1:], c * (-1) ** i)
    return out


def reduced_boundary(chain: dict) -> FormalSum:
    """Boundary with the augmentation: a 0-chain maps to its coefficient sum on ()."""
    return chain_boundary(chain)


def apartment_cycle(lat: Lattice, basis) -> FormalSum:
    """Signed sum over orderings of the flags spanned by an ordered basis.

    Flags are keyed by tuples of subspace ids (increasing dimension); the
    top subspace itself is left out.
    """
    basis = [tuple(v) for v in basis]
    lines = [lat.line_of(v) for v in basis]
    W = lat.span(lines)
    if len(set(lines)) != len(lines) or lat.dim_of(W) != len(lines):
        raise ValueError("apartment needs a basis (distinct, independent vectors)")
    out = FormalSum()
    m = len(lines)
    for perm in itertools.permutations(range(m)):
        _, sign = sort_with_sign(perm)
        flag = []
        s = lat.zero
        for i in perm[:-1]:
            s = lat.join(s, lines[i])
            flag.append(s)
        out.add(tuple(flag), sign)
    return out


def check_symplectic_basis(lat: Lattice, basis) -> None:
    S = lat.space
    from .symplectic import omega

    for i, u in enumerate(basis):
        for j, v in enumerate(basis):
            want = 1 if (i % 2 == 0 and j == i + 1) else (-1 % S.p if (j % 2 == 0 and i == j + 1) else 0)
            if omega(u, v, S) != want:
                raise ValueError("basis violates the symplectic pairing table")


def symplectic_apartment_cycle(lat: Lattice, basis, check: bool = True) -> FormalSum:
    """Iterated join of the chains [w_i] - [w_ibar], as a chain of the isotropic line complex.

    Simplices are sorted tuples of line indices with orientation sign absorbed.
    """
    basis = [tuple(v) for v in basis]
    if check:
        check_symplectic_basis(lat, basis)
    chain = FormalSum({(): 1})
    for i in range(0, len(basis), 2):
        a, b = lat.line_of(basis[i]), lat.line_of(basis[i + 1])
        chain = join(chain, FormalSum({(a,): 1, (b,): -1}))
    return chain


def join(c1: dict, c2: dict, X: SimplicialComplex | None = None) -> FormalSum:
    """Bilinear join: concatenate vertex tuples, then sort with sign."""
    out = FormalSum()
    for s, a in c1.items():
        for t, b in c2.items():
            key, sign = sort_with_sign(s + t)
            if sign == 0:
                raise ValueError(f"cannot join {s} and {t}: shared vertex")
            if X is not None and not X.contains(key):
                raise ValueError(f"join of {s} and {t} is not a simplex")
            out.add(key, sign * a * b)
    return out


def symplectic_apartment_flags(lat: Lattice, basis) -> FormalSum:
    """The signed-permutation apartment in the isotropic building.

    Sum over choices of one vector per hyperbolic pair (a bar choice costs a
    sign) and over orderings of the chosen n vectors.
    """
    basis = [tuple(v) for v in basis]
    n = len(basis) // 2
    out = FormalSum()
    for bars in itertools.product((0, 1), repeat=n):
        chosen = [lat.line_of(basis[2 * i + b]) for i, b in enumerate(bars)]
        bsign = (-1) ** sum(bars)
        for perm in itertools.permutations(range(n)):
            _, sign = sort_with_sign(perm)
            flag, s = [], lat.zero
            for i in perm:
                s = lat.join(s, chosen[i])
                flag.append(s)
            out.add(tuple(flag), sign * bsign)
    return out


def lines_to_flags(lat: Lattice, chain: dict) -> FormalSum:
    """Chain map from line-complex chains to the building of spans.

    Each ordered line simplex goes to the signed sum, over orderings, of the
    flags of partial spans; orderings whose spans stall contribute nothing.
    """
    out = FormalSum()
    for s, c in chain.items():
        for perm in itertools.permutations(range(len(s))):
            _, sign = sort_with_sign(perm)
            flag, cur, ok = [], lat.zero, True
            for i in perm:
                nxt = lat.join(cur, s[i])
                if nxt == cur:
                    ok = False
                    break
                cur = nxt
                flag.append(cur)
            if ok:
                out.add(tuple(flag), sign * c)
    return out


def flags_to_vector(X: SimplicialComplex, chain: dict) -> dict[int, int]:
    """Coordinates of a flag chain (keys: tuples of vertex labels) in X's basis."""
    pos = {v: i for i, v in enumerate(X.vertices)}
    out = {}
    for flag, c in chain.items():
        key = tuple(pos[v] for v in flag)
        k = len(key) - 1
        idx = X.index(k)[key]
        out[idx] = out.get(idx, 0) + c
    return {i: c for i, c in out.items() if c}


def lines_to_vector(X: SimplicialComplex, chain: dict) -> dict[int, int]:
    """Coordinates of a line-simplex chain (keys: sorted line index tuples) in X's basis."""
    pos = X.line_pos
    out = {}
    for s, c in chain.items():
        key = tuple(pos[l] for l in s)
        idx = X.index(len(key) - 1)[key]
        out[idx] = out.get(idx, 0) + c
    return {i: c for i, c in out.items() if c}


def act_flags(lat: Lattice, A, chain: dict) -> FormalSum:
    out = FormalSum()
    for flag, c in chain.items():
        out.add(tuple(lat.sub_action(A, s) for s in flag), c)
    return out


def act_line_chain(perm: list[int], chain: dict) -> FormalSum:
    out = FormalSum()
    for s, c in chain.items():
        key, sign = sort_with_sign(perm[l] for l in s)
        out.add(key, sign * c)
    return out
