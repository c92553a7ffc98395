"""Prime-field arithmetic and canonical subspaces of F_p^m."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

DEFAULT_BUDGET = 10**7


class ResourceError(RuntimeError):
    """An enumeration or elimination would exceed the configured budget."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def inv(self, x: int) -> int:
        x %= self.p
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(x, self.p - 2, self.p)

    def elements(self):
        return range(self.p)

    def units(self):
        return range(1, self.p)


def normalize(v, p: int) -> tuple[int, ...] | None:
    """Scale v so its first nonzero coordinate is 1; None for the zero vector."""
    v = [x % p for x in v]
    for x in v:
        if x:
            s = pow(x, p - 2, p)
            return tuple(y * s % p for y in v)
    return None


@dataclass(frozen=True, order=True)
class Line:
    """A line of F_p^m by its pivot-normalized representative.

    Ordering is lexicographic on the representative; this is the global
    line order used for every orientation sign in the package.
    """

    rep: tuple[int, ...]
    p: int

    @classmethod
    def of(cls, v, p: int) -> "Line":
        rep = normalize(v, p)
        if rep is None:
            raise ValueError("zero vector spans no line")
        return cls(rep, p)


def _rref_rows(rows, p: int, ncols: int) -> tuple[list[list[int]], list[int]]:
    m = [[x % p for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        s = pow(m[r][c], p - 2, p)
        row = [x * s % p for x in m[r]]
        m[r] = row
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], row)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


@dataclass(frozen=True)
class Subspace:
    """Subspace of F_p^ambient stored as its unique RREF basis."""

    basis: tuple[tuple[int, ...], ...]
    ambient: int
    p: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(next(i for i, x in enumerate(r) if x) for r in self.basis)

    def contains(self, v) -> bool:
        return membership(v, self)

    def vectors(self):
        """All p^dim vectors of the subspace (brute force)."""
        p, m = self.p, self.ambient
        for coeffs in itertools.product(range(p), repeat=self.dim):
            yield tuple(sum(c * r[i] for c, r in zip(coeffs, self.basis)) % p for i in range(m))

    def __le__(self, other: "Subspace") -> bool:
        return all(membership(r, other) for r in self.basis)


def rref(rows, p: int, ambient: int | None = None) -> Subspace:
    rows = [tuple(r) for r in rows]
    if ambient is None:
        if not rows:
            raise ValueError("ambient dimension needed for an empty row set")
        ambient = len(rows[0])
    if any(len(r) != ambient for r in rows):
        raise ValueError("row length differs from ambient dimension")
    red, _ = _rref_rows(rows, p, ambient)
    return Subspace(tuple(tuple(r) for r in red), ambient, p)


def zero_subspace(ambient: int, p: int) -> Subspace:
    return Subspace((), ambient, p)


def full_space(ambient: int, p: int) -> Subspace:
    return Subspace(tuple(tuple(int(i == j) for j in range(ambient)) for i in range(ambient)), ambient, p)


def reduce_vector(v, W: Subspace) -> list[int]:
    """Remainder of v after elimination against the RREF rows of W."""
    p = W.p
    v = [x % p for x in v]
    for row in W.basis:
        c = next(i for i, x in enumerate(row) if x)
        f = v[c]
        if f:
            v = [(a - f * b) % p for a, b in zip(v, row)]
    return v


def membership(v, W: Subspace) -> bool:
    if len(v) != W.ambient:
        raise ValueError(f"vector of length {len(v)} in ambient dimension {W.ambient}")
    return not any(reduce_vector(v, W))


def span(vectors, p: int, ambient: int) -> Subspace:
    return rref(list(vectors), p, ambient)


def rank(rows, p: int) -> int:
    rows = [tuple(r) for r in rows]
    if not rows:
        return 0
    return len(_rref_rows(rows, p, len(rows[0]))[0])


def kernel(rows, p: int, ncols: int) -> list[tuple[int, ...]]:
    """Basis of {x : rows·x = 0} over F_p."""
    red, piv = _rref_rows(rows, p, ncols)
    free = [c for c in range(ncols) if c not in piv]
    out = []
    for f in free:
        x = [0] * ncols
        x[f] = 1
        for r, c in zip(red, piv):
            x[c] = -r[f] % p
        out.append(tuple(x))
    return out


def enumerate_lines(dim: int, p: int, budget: int = DEFAULT_BUDGET) -> list[Line]:
    if dim < 1:
        raise ValueError("dimension must be positive")
    PrimeField(p)
    if p**dim > budget:
        raise ResourceError(f"F_{p}^{dim} has {p**dim} vectors, budget is {budget}")
    out = []
    for lead in range(dim):
        for tail in itertools.product(range(p), repeat=dim - lead - 1):
            out.append(Line((0,) * lead + (1,) + tail, p))
    out.sort()
    return out


def mat_vec(A, v, p: int) -> tuple[int, ...]:
    return tuple(sum(a * x for a, x in zip(row, v)) % p for row in A)


def mat_mul(A, B, p: int | None = None):
    n, k, m = len(A), len(B), len(B[0])
    C = [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)] for i in range(n)]
    if p is not None:
        C = [[x % p for x in row] for row in C]
    return C


def transpose(A):
    return [list(r) for r in zip(*A)]
