"""Integral symplectic bases, mod-p reduction to V0 generators, and lifting of
the integral apartment relations into the image of d1.

Integral apartment terms are tuples of n column pairs ((v1, v1bar), ...), each
column a primitive integer vector with positive leading entry (lines of Q^2n).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

from .homology import ColumnSpace, FormalSum, random_primes
from .lattice import Lattice, symplectic_lattice
from .symplectic import SplitMix64
from .symp_sharbly import PresentationData, build_presentation

MAX_TRIES = 10**4


def int_omega(u, v) -> int:
    return sum(u[2 * i] * v[2 * i + 1] - u[2 * i + 1] * v[2 * i] for i in range(len(u) // 2))


def standard_gram(n: int) -> list[list[int]]:
    m = 2 * n
    G = [[0] * m for _ in range(m)]
    for i in range(n):
        G[2 * i][2 * i + 1], G[2 * i + 1][2 * i] = 1, -1
    return G


@dataclass(frozen=True)
class IntegralSymplecticBasis:
    cols: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.cols) // 2

    @property
    def height(self) -> int:
        return max(abs(x) for c in self.cols for x in c)

    def is_symplectic(self) -> bool:
        G = standard_gram(self.n)
        m = len(self.cols)
        return all(int_omega(self.cols[i], self.cols[j]) == G[i][j] for i in range(m) for j in range(m))

    def pairs(self):
        return tuple((self.cols[2 * i], self.cols[2 * i + 1]) for i in range(self.n))


def identity_basis(n: int) -> IntegralSymplecticBasis:
    m = 2 * n
    return IntegralSymplecticBasis(tuple(tuple(int(i == j) for i in range(m)) for j in range(m)))


def int_transvect(cols, v, c: int):
    """Apply x -> x + c*omega(x, v)*v to every column."""
    out = []
    for x in cols:
        t = c * int_omega(x, v)
        out.append(tuple(a + t * b for a, b in zip(x, v)))
    return tuple(out)


def random_integral_basis(n: int, height_bound: int = 10, seed: int = 0) -> IntegralSymplecticBasis:
    """Identity times 5..20 seeded transvections by small vectors, rejection-sampled on height."""
    rng = SplitMix64(seed)
    m = 2 * n
    for _ in range(MAX_TRIES):
        cols = identity_basis(n).cols
        for _ in range(5 + rng.below(16)):
            v = [0] * m
            for i in rng_sample(rng, m, 1 + rng.below(2)):
                v[i] = 1 if rng.below(2) else -1
            cols = int_transvect(cols, v, 1 if rng.below(2) else -1)
        B = IntegralSymplecticBasis(cols)
        if B.height <= height_bound:
            if not B.is_symplectic():
                raise AssertionError("integral transvection product is not symplectic")
            return B
    raise RuntimeError(f"no basis of height <= {height_bound} after {MAX_TRIES} tries; raise the bound")


def rng_sample(rng: SplitMix64, m: int, k: int) -> list[int]:
    pool = list(range(m))
    out = []
    for _ in range(k):
        out.append(pool.pop(rng.below(len(pool))))
    return out


def primitive(v) -> tuple[int, ...]:
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector")
    v = [x // g for x in v]
    if next(x for x in v if x) < 0:
        v = [-x for x in v]
    return tuple(v)


def apartment_term(pairs) -> tuple:
    return tuple((primitive(a), primitive(b)) for a, b in pairs)


def reduce_term(lat: Lattice, term) -> tuple[tuple, int]:
    """V0 generator (with sign from ordering each pair) of an integral apartment term."""
    p = lat.p
    gen, sign = [], 1
    for a, b in term:
        la = lat.line_of(tuple(x % p for x in a))
        lb = lat.line_of(tuple(x % p for x in b))
        if la == lb or not lat.pairing[la][lb]:
            raise AssertionError("reduction of a symplectic pair is degenerate")
        if la > lb:
            la, lb, sign = lb, la, -sign
        gen.append((lat.span((la, lb)), (la, lb)))
    return tuple(gen), sign


def mod_p_reduce(B: IntegralSymplecticBasis, p: int) -> tuple[tuple, int]:
    lat = symplectic_lattice(B.n, p)
    return reduce_term(lat, apartment_term(B.pairs()))


def reduce_sum(lat: Lattice, s: dict) -> FormalSum:
    out = FormalSum()
    for term, c in s.items():
        g, sign = reduce_term(lat, term)
        out.add(g, sign * c)
    return out


# ---------------------------------------------------------------- relations

@dataclass(frozen=True)
class RelationInstance:
    kind: str
    basis: IntegralSymplecticBasis
    params: tuple


def perm_sign(pi) -> int:
    s = 1
    for i, j in itertools.combinations(range(len(pi)), 2):
        if pi[i] > pi[j]:
            s = -s
    return s


def _lin(*terms):
    return tuple(sum(c * v[i] for c, v in terms) for i in range(len(terms[0][1])))


def relation_instance(kind: str, B: IntegralSymplecticBasis, params) -> FormalSum:
    """Left side minus right side of an integral apartment relation.

    perm: params = (block permutation, flips); the k-th pair of the right side
    is the pi(k)-th pair of B, swapped when flips[k]; sign sgn(pi)*(-1)^(#flips).
    byk1: params = (a, b), units acting on the first pair.
    byk2: params = (a,), a unit mixing the first two pairs.
    """
    P = list(B.pairs())
    out = FormalSum()
    out.add(apartment_term(P), 1)
    if kind == "perm":
        pi, flips = params
        if sorted(pi) != list(range(B.n)) or len(flips) != B.n:
            raise ValueError("not a signed permutation")
        Q = [P[pi[k]][::-1] if flips[k] else P[pi[k]] for k in range(B.n)]
        out.add(apartment_term(Q), -perm_sign(pi) * (-1) ** sum(map(bool, flips)))
    elif kind == "byk1":
        a, b = params
        if a not in (1, -1) or b not in (1, -1):
            raise ValueError("byk1 parameters must be units of Z")
        v1, v1b = P[0]
        u = _lin((a, v1), (b, v1b))
        out.add(apartment_term([(v1, u)] + P[1:]), -1)
        out.add(apartment_term([(u, v1b)] + P[1:]), -1)
    elif kind == "byk2":
        (a,) = params
        if a not in (1, -1):
            raise ValueError("byk2 parameter must be a unit of Z")
        if B.n < 2:
            raise ValueError("byk2 needs n >= 2")
        (v1, v1b), (v2, v2b) = P[0], P[1]
        x = _lin((1, v1b), (-a, v2b))
        y = _lin((1, v2), (a, v1))
        out.add(apartment_term([(v1, x), (y, v2b)] + P[2:]), -1)
        out.add(apartment_term([(x, v2), (y, v1b)] + P[2:]), -1)
    else:
        raise ValueError(f"unknown relation kind {kind!r}")
    return FormalSum({k: v for k, v in out.items() if v})


def random_relation(kind: str, n: int, seed: int, height_bound: int = 10) -> RelationInstance:
    rng = SplitMix64(seed ^ 0x5DEECE66D)
    B = random_integral_basis(n, height_bound, seed)
    if kind == "perm":
        pi = list(range(n))
        for i in range(n - 1, 0, -1):
            j = rng.below(i + 1)
            pi[i], pi[j] = pi[j], pi[i]
        params = (tuple(pi), tuple(rng.below(2) for _ in range(n)))
    elif kind == "byk1":
        params = (1 - 2 * rng.below(2), 1 - 2 * rng.below(2))
    else:
        params = (1 - 2 * rng.below(2),)
    return RelationInstance(kind, B, params)


@lru_cache(maxsize=None)
def presentation_for(n: int, p: int) -> PresentationData:
    return build_presentation(symplectic_lattice(n, p), with_d2=False)


@lru_cache(maxsize=None)
def _image_spaces(n: int, p: int, seed: int) -> tuple[ColumnSpace, ...]:
    d1 = presentation_for(n, p).d1
    return tuple(ColumnSpace(d1, q) for q in random_primes(2, seed))


def check_relation_lifts(inst: RelationInstance, p: int, seed: int = 0) -> dict:
    """Reduce the relation mod p and test membership in im(d1)."""
    n = inst.basis.n
    lat = symplectic_lattice(n, p)
    pres = presentation_for(n, p)
    red = reduce_sum(lat, relation_instance(inst.kind, inst.basis, inst.params))
    vec = {}
    for g, c in red.items():
        if c:
            i = pres.V0.index[g]
            vec[i] = vec.get(i, 0) + c
    vec = {i: c for i, c in vec.items() if c}
    in_im = all(cs.contains(vec) for cs in _image_spaces(n, p, seed))
    return {"kind": inst.kind, "n": n, "p": p, "in_image": in_im, "support": len(vec)}


def unit_surjectivity(p: int) -> bool:
    """Does Z^x = {1, -1} surject onto F_p^x?"""
    return p <= 3


# ------------------------------------------------------------------- lifting

def _solve_transvections(lat: Lattice, A_cols) -> list[tuple[tuple[int, ...], int]]:
    """Transvections (v, c), applied in order, carrying the columns of A to the standard basis."""
    p, m = lat.p, lat.dim
    S = lat.space
    from .symplectic import omega

    inv = lambda x: pow(x % p, p - 2, p)
    cols = [tuple(c) for c in A_cols]
    steps = []
    std = [tuple(int(i == j) for i in range(m)) for j in range(m)]

    def apply(v, c):
        nonlocal cols
        out = []
        for x in cols:
            t = c * omega(x, v, S)
            out.append(tuple((a + t * b) % p for a, b in zip(x, v)))
        cols = out
        steps.append((v, c))

    def move(x_idx, y, allowed):
        """Send cols[x_idx] to y with transvections by vectors in `allowed`."""
        x = cols[x_idx]
        if x == y:
            return
        w = omega(x, y, S)
        if w:
            apply(tuple((b - a) % p for a, b in zip(x, y)), inv(w))
            return
        for z in allowed:
            if omega(x, z, S) and omega(z, y, S):
                move(x_idx, z, allowed)
                move(x_idx, y, allowed)
                return
        raise AssertionError("no intermediate vector found")

    for k in range(m // 2):
        fixed = std[: 2 * k]
        allowed = [z for z in itertools.product(range(p), repeat=m)
                   if any(z) and all(omega(z, f, S) == 0 for f in fixed)]
        move(2 * k, std[2 * k], allowed)
        e = std[2 * k]
        b = cols[2 * k + 1]
        target = std[2 * k + 1]
        if b != target:
            if omega(b, target, S):
                apply(tuple((t - a) % p for a, t in zip(b, target)), inv(omega(b, target, S)))
            else:
                z = tuple((x + y) % p for x, y in zip(target, e))
                apply(tuple((t - a) % p for a, t in zip(b, z)), inv(omega(b, z, S)))
                b = cols[2 * k + 1]
                apply(tuple((t - a) % p for a, t in zip(b, target)), inv(omega(b, target, S)))
    if cols != std:
        raise AssertionError("transvection reduction did not reach the identity")
    return steps


def lift_v0_generator(lat: Lattice, gen) -> IntegralSymplecticBasis:
    """An integral symplectic basis whose reduction is gen (up to sign)."""
    from .symplectic import omega

    p = lat.p
    cols = []
    for _, (la, lb) in gen:
        u, w = lat.reps[la], lat.reps[lb]
        s = pow(omega(u, w, lat.space), p - 2, p)
        cols += [u, tuple(x * s % p for x in w)]
    steps = _solve_transvections(lat, cols)
    B = identity_basis(lat.dim // 2).cols
    # A = T_1^-1 ... T_k^-1 applied to the identity, so undo the steps in reverse
    for v, c in reversed(steps):
        B = int_transvect(B, v, -c)
    out = IntegralSymplecticBasis(B)
    if not out.is_symplectic():
        raise AssertionError("lift is not symplectic")
    if any((x - y) % p for c1, c2 in zip(B, cols) for x, y in zip(c1, c2)):
        raise AssertionError("lift does not reduce to the target basis")
    return out


__all__ = [
    "IntegralSymplecticBasis", "RelationInstance", "apartment_term", "check_relation_lifts",
    "identity_basis", "int_omega", "presentation_for", "lift_v0_generator", "mod_p_reduce", "random_integral_basis",
    "random_relation", "reduce_sum", "reduce_term", "relation_instance", "standard_gram",
    "unit_surjectivity",
]
