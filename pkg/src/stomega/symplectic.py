"""The standard symplectic form on F_p^{2n} and form-aware subspace operations.

Basis order is interleaved: e1, e1bar, e2, e2bar, ...; omega(e_i, e_ibar) = 1.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .gf_linalg import (
    DEFAULT_BUDGET,
    Line,
    PrimeField,
    ResourceError,
    Subspace,
    full_space,
    kernel,
    membership,
    normalize,
    rref,
    zero_subspace,
)

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SymplecticSpace:
    n: int
    p: int

    def __post_init__(self):
        PrimeField(self.p)
        if self.n < 1:
            raise ValueError("genus must be positive")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @cached_property
    def gram(self) -> tuple[tuple[int, ...], ...]:
        g = [[0] * self.dim for _ in range(self.dim)]
        for i in range(self.n):
            g[2 * i][2 * i + 1] = 1
            g[2 * i + 1][2 * i] = self.p - 1
        return tuple(tuple(r) for r in g)

    def basis_vector(self, i: int, bar: bool = False) -> tuple[int, ...]:
        """e_i (1-indexed) or its partner e_ibar."""
        v = [0] * self.dim
        v[2 * (i - 1) + int(bar)] = 1
        return tuple(v)

    @property
    def full(self) -> Subspace:
        return full_space(self.dim, self.p)


@dataclass(frozen=True)
class Decomposition:
    factors: tuple[Subspace, ...]


def omega(u, v, S: SymplecticSpace) -> int:
    if len(u) != S.dim or len(v) != S.dim:
        raise ValueError("vector length differs from 2n")
    s = 0
    for i in range(0, S.dim, 2):
        s += u[i] * v[i + 1] - u[i + 1] * v[i]
    return s % S.p


def _restricted_gram(W: Subspace, S: SymplecticSpace):
    return [[omega(a, b, S) for b in W.basis] for a in W.basis]


def radical(W: Subspace, S: SymplecticSpace) -> Subspace:
    if W.dim == 0:
        return W
    coeffs = kernel(_restricted_gram(W, S), S.p, W.dim)
    vecs = [[sum(c * r[i] for c, r in zip(x, W.basis)) for i in range(S.dim)] for x in coeffs]
    return rref(vecs, S.p, S.dim)


def genus(W: Subspace, S: SymplecticSpace) -> int:
    return (W.dim - radical(W, S).dim) // 2


def is_symplectic(W: Subspace, S: SymplecticSpace) -> bool:
    return W.dim > 0 and radical(W, S).dim == 0


def is_isotropic(W: Subspace, S: SymplecticSpace) -> bool:
    return all(omega(a, b, S) == 0 for a, b in itertools.combinations(W.basis, 2))


def perp(W: Subspace, S: SymplecticSpace) -> Subspace:
    if W.dim == 0:
        return S.full
    # omega(w, v) = w^T G v, so each basis row w contributes the row w^T G
    rows = [[sum(w[k] * S.gram[k][j] for k in range(S.dim)) % S.p for j in range(S.dim)] for w in W.basis]
    return rref(kernel(rows, S.p, S.dim), S.p, S.dim)


def intersect(A: Subspace, B: Subspace, S: SymplecticSpace | None = None) -> Subspace:
    p, m = A.p, A.ambient
    if A.dim == 0 or B.dim == 0:
        return zero_subspace(m, p)
    # x A = y B  <=>  [A; -B]^T (x, y) = 0
    cols = list(A.basis) + [tuple(-x % p for x in b) for b in B.basis]
    rows = [[c[i] for c in cols] for i in range(m)]
    sols = kernel(rows, p, len(cols))
    vecs = [[sum(s[k] * A.basis[k][i] for k in range(A.dim)) for i in range(m)] for s in sols]
    return rref(vecs, p, m)


def lines_of(W: Subspace) -> list[Line]:
    """Lines contained in W, in the global order."""
    out = []
    for v in W.vectors():
        first = next((x for x in v if x), 0)
        if first == 1:
            out.append(Line(v, W.p))
    out.sort()
    return out


def complete_hyperbolic(W: Subspace, S: SymplecticSpace) -> list[tuple[int, ...]]:
    """Greedy-least symplectic basis (w1, w1bar, ..., wg, wgbar) of W."""
    if not is_symplectic(W, S):
        raise ValueError("subspace is not symplectic")
    p = S.p
    out: list[tuple[int, ...]] = []
    U = W
    while U.dim:
        cand = lines_of(U)
        e = cand[0].rep
        f = next(l.rep for l in cand if omega(e, l.rep, S))
        s = pow(omega(e, f, S), p - 2, p)
        f = tuple(x * s % p for x in f)
        out += [e, f]
        U = intersect(U, perp(rref([e, f], p), S))
    return out


def project_vector(v, hyperbolic: list[tuple[int, ...]], S: SymplecticSpace) -> tuple[int, ...]:
    """Image of v under projection along span(hyperbolic) onto its perp."""
    p = S.p
    out = list(v)
    for e, f in zip(hyperbolic[::2], hyperbolic[1::2]):
        a, b = omega(v, f, S), omega(v, e, S)
        out = [(x - a * y + b * z) % p for x, y, z in zip(out, e, f)]
    return tuple(out)


def project_perp(v, X: Subspace, S: SymplecticSpace) -> Line:
    if membership(v, X):
        raise ValueError("vector lies in X; its projection is zero")
    return Line.of(project_vector(v, complete_hyperbolic(X, S), S), S.p)


def _rref_matrices(k: int, m: int, p: int):
    """All k x m RREF matrices of rank k, in lexicographic order of basis rows."""
    for piv in itertools.combinations(range(m), k):
        free = [(r, c) for r in range(k) for c in range(piv[r] + 1, m) if c not in piv]
        for vals in itertools.product(range(p), repeat=len(free)):
            rows = [[0] * m for _ in range(k)]
            for r, c in enumerate(piv):
                rows[r][c] = 1
            for (r, c), x in zip(free, vals):
                rows[r][c] = x
            yield tuple(tuple(r) for r in rows)


def enum_subspaces(dim: int, S_or_ambient, p: int | None = None, budget: int = DEFAULT_BUDGET) -> list[Subspace]:
    if isinstance(S_or_ambient, SymplecticSpace):
        m, p = S_or_ambient.dim, S_or_ambient.p
    else:
        m = S_or_ambient
    if p ** (dim * (m - dim)) > budget:
        raise ResourceError("subspace enumeration exceeds budget")
    out = [Subspace(b, m, p) for b in _rref_matrices(dim, m, p)]
    out.sort(key=lambda W: W.basis)
    return out


def enum_symplectic_subspaces(S: SymplecticSpace, g: int, budget: int = DEFAULT_BUDGET) -> list[Subspace]:
    if not 1 <= g <= S.n:
        raise ValueError("genus out of range")
    return [W for W in enum_subspaces(2 * g, S, budget=budget) if is_symplectic(W, S)]


def enum_decompositions(S: SymplecticSpace, signature, budget: int = DEFAULT_BUDGET) -> list[Decomposition]:
    signature = list(signature)
    if not signature or any(g < 1 for g in signature) or sum(signature) != S.n:
        raise ValueError(f"signature {signature} does not partition genus {S.n}")
    pools = {g: enum_symplectic_subspaces(S, g, budget) for g in set(signature)}
    out: list[Decomposition] = []

    def rec(i: int, U: Subspace, acc: list[Subspace]):
        if i == len(signature) - 1:
            out.append(Decomposition(tuple(acc + [U])))
            return
        for W in pools[signature[i]]:
            if W <= U:
                rec(i + 1, intersect(U, perp(W, S)), acc + [W])

    rec(0, S.full, [])
    return out


def check_decomposition(D: Decomposition, S: SymplecticSpace) -> bool:
    if sum(W.dim for W in D.factors) != S.dim:
        return False
    if not all(is_symplectic(W, S) for W in D.factors):
        return False
    for A, B in itertools.combinations(D.factors, 2):
        if any(omega(a, b, S) for a in A.basis for b in B.basis):
            return False
    return rref([r for W in D.factors for r in W.basis], S.p, S.dim).dim == S.dim


class SplitMix64:
    """The splitmix64 generator (Steele, Lea, Flood), one 64-bit word per call."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, k: int) -> int:
        return self.next() % k


def transvection(u, c: int, S: SymplecticSpace) -> list[list[int]]:
    """Matrix of v -> v + c omega(v, u) u (columns are images of basis vectors)."""
    p = S.p
    cols = []
    for j in range(S.dim):
        e = [int(i == j) for i in range(S.dim)]
        t = c * omega(e, u, S)
        cols.append([(x + t * y) % p for x, y in zip(e, u)])
    return [list(r) for r in zip(*cols)]


def preserves_form(A, S: SymplecticSpace) -> bool:
    p, m = S.p, S.dim
    cols = [[A[i][j] for i in range(m)] for j in range(m)]
    return all(omega(cols[i], cols[j], S) == S.gram[i][j] for i in range(m) for j in range(m))


def random_symplectic(S: SymplecticSpace, seed: int) -> list[list[int]]:
    rng = SplitMix64(seed)
    p, m = S.p, S.dim
    A = [[int(i == j) for j in range(m)] for i in range(m)]
    for _ in range(5 + rng.below(26)):
        u = [0] * m
        while not any(u):
            u = [rng.below(p) for _ in range(m)]
        c = 1 + rng.below(p - 1)
        T = transvection(u, c, S)
        A = [[sum(T[i][k] * A[k][j] for k in range(m)) % p for j in range(m)] for i in range(m)]
    if not preserves_form(A, S):
        raise AssertionError("transvection product lost the symplectic form")
    return A


def act(A, v, p: int) -> tuple[int, ...]:
    return tuple(sum(a * x for a, x in zip(row, v)) % p for row in A)


def act_line(A, line: Line) -> Line:
    return Line.of(act(A, line.rep, line.p), line.p)


def act_subspace(A, W: Subspace) -> Subspace:
    return rref([act(A, r, W.p) for r in W.basis], W.p, W.ambient)


__all__ = [
    "Decomposition", "SymplecticSpace", "SplitMix64", "act", "act_line", "act_subspace",
    "check_decomposition", "complete_hyperbolic", "enum_decompositions", "enum_subspaces",
    "enum_symplectic_subspaces", "genus", "intersect", "is_isotropic", "is_symplectic",
    "lines_of", "normalize", "omega", "perp", "preserves_form", "project_perp",
    "project_vector", "radical", "random_symplectic", "transvection",
]
