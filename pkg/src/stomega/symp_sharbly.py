"""Symplectic Sharbly resolution: graded terms, the omit/split differential,
the finite Steinberg resolution, the low-degree presentation of St^omega and
the standard-Sharbly reduction.

A TensorGen is a tuple of factors (W, lines): W a subspace id of the lattice,
lines a sorted tuple of line indices spanning W. Factor order is the order of
the (ordered) perpendicular decomposition.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .complexes import (
    build_symplectic_tits,
    chain_complex,
    flags_to_vector,
    join,
    lines_to_flags,
    sort_with_sign,
)
from .gf_linalg import DEFAULT_BUDGET, ResourceError
from .homology import FormalSum, HomologyBasis, SparseMat, homology_coords, rank
from .lattice import Lattice
from .sharbly import SharblyGen, sh_basis, steinberg_model

TensorGen = tuple  # tuple[tuple[int, tuple[int, ...]], ...]

SIGN_CONVENTION = "omit:(-1)^(sum_{t<j}(d_t-1)+i); split:(-1)^(sum_{t<j}(d_t-1)+p*d_j+sgn(shuffle)+sum_{t>j}d_t); degenerate split=0; resolution:(-1)^(i+j-1)"


def tg_degree(lat: Lattice, g: TensorGen) -> int:
    n = lat.dim // 2
    return sum(len(ls) - lat.dim_of(W) for W, ls in g) + n - len(g)


def tg_check(lat: Lattice, g: TensorGen) -> None:
    """Raise unless g is a valid generator (perpendicular symplectic factors, spanning lines)."""
    tot = 0
    for W, ls in g:
        if not lat.is_symplectic(W):
            raise ValueError("factor is not symplectic")
        if tuple(sorted(set(ls))) != tuple(ls) or lat.span(ls) != W:
            raise ValueError("factor lines are not a sorted spanning set")
        tot += lat.dim_of(W)
    for (A, _), (B, _) in itertools.combinations(g, 2):
        if not lat.contains(lat.perp(A), B):
            raise ValueError("factors are not perpendicular")
    if tot != lat.dim:
        raise ValueError("factors do not fill the space")


def compositions(total: int, parts: int, minimum: int = 0):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(minimum, total - minimum * (parts - 1) + 1):
        for rest in compositions(total - first, parts - 1, minimum):
            yield (first,) + rest


@dataclass
class GradedModule:
    degree: int
    gens: list
    index: dict = field(default_factory=dict)
    census: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {g: i for i, g in enumerate(self.gens)}

    def __len__(self):
        return len(self.gens)


def _factor_basis(lat: Lattice, W: int, k: int, cache: dict) -> list[tuple[int, ...]]:
    key = (W, k)
    if key not in cache:
        cache[key] = [g.lines for g in sh_basis(W, k, lat)]
    return cache[key]


def enum_degree_terms(lat: Lattice, d: int, budget: int = DEFAULT_BUDGET) -> GradedModule:
    n = lat.dim // 2
    gens: list = []
    census: dict = {}
    cache: dict = {}
    for m in range(1, n + 1):
        ktot = d - n + m
        if ktot < 0:
            continue
        for sig in compositions(n, m, 1):
            decs = lat.decompositions(sig)
            for kv in compositions(ktot, m):
                count = 0
                for dec in decs:
                    pools = [_factor_basis(lat, W, k, cache) for W, k in zip(dec, kv)]
                    for combo in itertools.product(*pools):
                        gens.append(tuple(zip(dec, combo)))
                        count += 1
                        if len(gens) > budget:
                            raise ResourceError("graded module exceeds budget")
                if count:
                    census[(sig, kv)] = count
    return GradedModule(d, gens, census=census)


def omit_terms(lat: Lattice, g: TensorGen) -> FormalSum:
    out = FormalSum()
    for t, c, _ in _omit(lat, g):
        out.add(t, c)
    return out


def split_terms(lat: Lattice, g: TensorGen) -> FormalSum:
    out = FormalSum()
    for t, c, _ in _split(lat, g):
        out.add(t, c)
    return out


def _omit(lat: Lattice, g: TensorGen):
    prefix = 0
    for j, (W, ls) in enumerate(g):
        if len(ls) > lat.dim_of(W):
            for i in range(len(ls)):
                rest = ls[:i] + ls[i + 1:]
                if lat.span(rest) == W:
                    yield g[:j] + ((W, rest),) + g[j + 1:], (-1) ** (prefix + i), 0
        prefix += len(ls) - 2


def _split(lat: Lattice, g: TensorGen):
    ds = [len(ls) - 1 for _, ls in g]
    prefix = 0
    for j, (W, ls) in enumerate(g):
        suffix = sum(ds[j + 1:])
        N = len(ls)
        gW = lat.genus(W)
        if gW >= 2:
            for mask in range(1, (1 << N) - 1):
                removed = [i for i in range(N) if mask >> i & 1]
                rem = tuple(ls[i] for i in range(N) if not mask >> i & 1)
                X = lat.span(rem)
                if X == W or not lat.is_symplectic(X):
                    continue
                proj = [lat.project(X, ls[i]) for i in removed]
                if -1 in proj:
                    continue
                key, s = sort_with_sign(proj)
                if s == 0:
                    continue
                Y = lat.span(key)
                pp = len(removed) - 1
                shuffle = sum(i - t for t, i in enumerate(removed))
                nu = prefix + pp * ds[j] + shuffle + suffix
                coeff = s * (-1) ** nu
                r = gW - lat.genus(X) if j == 0 else 0
                yield g[:j] + ((X, rem), (Y, key)) + g[j + 1:], coeff, r
        prefix += ds[j] - 1


def differential_terms(lat: Lattice, g: TensorGen):
    """(term, coefficient, r) triples; r is the genus drop of the first factor."""
    yield from _omit(lat, g)
    yield from _split(lat, g)


def apply_differential(lat: Lattice, g: TensorGen) -> FormalSum:
    out = FormalSum()
    for t, c, _ in differential_terms(lat, g):
        out.add(t, c)
    return out


def differential(lat: Lattice, source: GradedModule, target: GradedModule, check_degree: bool = True) -> SparseMat:
    cols = []
    for g in source.gens:
        col = {}
        for t, c in apply_differential(lat, g).items():
            i = target.index.get(t)
            if i is None:
                raise AssertionError(f"term {t} of {g} is missing from degree {target.degree}")
            col[i] = c
        cols.append(col)
    return SparseMat(len(target), len(source), cols)


def check_d2(lat: Lattice, d_max: int, modules: dict | None = None) -> dict:
    """d o d = 0 on every generator of degree 2..d_max, bucket by bucket.

    The bucket of a composite term is r + s, the total genus drop of the first
    factor across the two steps; each bucket must vanish on its own.
    """
    report = {"degrees": {}, "pass": True, "witness": None}
    for d in range(2, d_max + 1):
        mod = (modules or {}).get(d) or enum_degree_terms(lat, d)
        memo: dict = {}
        bad = 0
        buckets_seen: set = set()
        for g in mod.gens:
            acc: dict = {}
            for h, c, r in differential_terms(lat, g):
                terms = memo.get(h)
                if terms is None:
                    terms = list(differential_terms(lat, h))
                    memo[h] = terms
                for h2, c2, s in terms:
                    key = (r + s, h2)
                    acc[key] = acc.get(key, 0) + c * c2
            nz = [k for k, v in acc.items() if v]
            buckets_seen.update(k[0] for k in acc)
            if nz:
                bad += 1
                if report["witness"] is None:
                    report["witness"] = {"degree": d, "generator": g, "bucket": nz[0][0], "term": nz[0][1]}
        report["degrees"][d] = {"generators": len(mod), "failures": bad, "buckets": sorted(buckets_seen)}
        if bad:
            report["pass"] = False
    return report


def act_tensor(lat: Lattice, A, g: TensorGen, perm=None) -> tuple[TensorGen, int]:
    """Image of a generator under a symplectic matrix, with the sorting sign."""
    perm = perm or lat.line_action(A)
    out, sign = [], 1
    for W, ls in g:
        key, s = sort_with_sign(perm[l] for l in ls)
        out.append((lat.sub_action(A, W), key))
        sign *= s
    return tuple(out), sign


def act_sum(lat: Lattice, A, chain: dict, perm=None) -> FormalSum:
    perm = perm or lat.line_action(A)
    out = FormalSum()
    for g, c in chain.items():
        h, s = act_tensor(lat, A, g, perm)
        out.add(h, s * c)
    return out


# ---------------------------------------------------------------- Steinberg side

class SymplecticSteinbergModel:
    """St^omega(U) as top reduced homology of the isotropic building of U.

    A genus-0 U gives the rank-1 module (homology of the empty complex in
    degree -1).
    """

    def __init__(self, lat: Lattice, U: int):
        self.lat, self.space = lat, U
        g = lat.genus(U) if U != lat.zero else 0
        self.genus = g
        if g == 0:
            self.building = None
            self.rank = 1
            return
        self.building = build_symplectic_tits(lat, U)
        self.coords: HomologyBasis = homology_coords(chain_complex(self.building), g - 1)
        self.rank = self.coords.rank

    def project_flags(self, chain: dict) -> tuple[int, ...]:
        if self.building is None:
            return (chain.get((), 0),)
        return self.coords.project(flags_to_vector(self.building, chain))

    def project_lines(self, chain: dict) -> tuple[int, ...]:
        """Coordinates of a chain of isotropic line simplices."""
        if self.building is None:
            return (chain.get((), 0),)
        return self.project_flags(lines_to_flags(self.lat, chain))

    def join_class(self, pairs) -> tuple[int, ...]:
        return self.project_lines(pair_join_chain(pairs))


def pair_join_chain(pairs) -> FormalSum:
    """Join of the 0-chains [a] - [b] over line pairs (a, b), in order."""
    chain = FormalSum({(): 1})
    for a, b in pairs:
        chain = join(chain, FormalSum({(a,): 1, (b,): -1}))
    return chain


@lru_cache(maxsize=None)
def symplectic_steinberg_model(lat: Lattice, U: int) -> SymplecticSteinbergModel:
    return SymplecticSteinbergModel(lat, U)


def v0_pairs(g: TensorGen) -> list[tuple[int, int]]:
    for W, ls in g:
        if len(ls) != 2:
            raise ValueError("augmentation is defined on all-genus-1, degree-0 generators")
    return [tuple(ls) for _, ls in g]


def v0_to_steinberg(lat: Lattice, g: TensorGen) -> tuple[int, ...]:
    return symplectic_steinberg_model(lat, lat.full).join_class(v0_pairs(g))


def augmentation_matrix(lat: Lattice, V0: GradedModule) -> SparseMat:
    model = symplectic_steinberg_model(lat, lat.full)
    cols = []
    for g in V0.gens:
        v = model.join_class(v0_pairs(g))
        cols.append({i: x for i, x in enumerate(v) if x})
    return SparseMat(model.rank, len(V0), cols)


def kron(a, b) -> tuple[int, ...]:
    return tuple(x * y for x in a for y in b)


# ------------------------------------------------- finite Steinberg resolution

@dataclass
class PairPosition:
    genus: int
    summands: list[int]
    offsets: dict[int, int]
    sizes: dict[int, tuple[int, int]]
    dim: int


@dataclass
class SteinbergResolution:
    """Explicit coordinates for  0 -> St(V) -> ... -> (+) St(W) x St^w(W^perp) -> ... -> St^w(V) -> 0.

    Position g collects symplectic W of genus g (position n is V itself with
    St^w(0) of rank 1; position 0 is W = 0). maps[g] holds the images of a
    spanning set of chain representatives of position g in position g-1.
    """

    lat: Lattice
    positions: dict[int, PairPosition]
    reps: dict[int, list]
    domain: dict[int, SparseMat]
    maps: dict[int, SparseMat]
    composites_zero: dict[int, bool]

    @property
    def dims(self) -> list[int]:
        n = self.lat.dim // 2
        return [self.positions[g].dim for g in range(n, -1, -1)]


def _position(lat: Lattice, g: int) -> PairPosition:
    n = lat.dim // 2
    if g == 0:
        summands = [lat.zero]
    elif g == n:
        summands = [lat.full]
    else:
        summands = lat.symplectic_subspaces(g)
    offsets, sizes, off = {}, {}, 0
    for W in summands:
        a = steinberg_model(lat, W).rank
        b = symplectic_steinberg_model(lat, lat.perp(W)).rank
        offsets[W], sizes[W] = off, (a, b)
        off += a * b
    return PairPosition(g, summands, offsets, sizes, off)


def rep_coords(lat: Lattice, pos: PairPosition, rep) -> dict[int, int]:
    """Coordinates of (W, basis lines of W, line pairs of W^perp) in its position."""
    W, vlines, pairs = rep
    a = steinberg_model(lat, W).apartment(vlines)
    b = symplectic_steinberg_model(lat, lat.perp(W)).join_class(pairs)
    off = pos.offsets[W]
    return {off + i: x for i, x in enumerate(kron(a, b)) if x}


def resolution_differential(lat: Lattice, rep) -> list[tuple[object, int]]:
    """Chain-level image of a representative under the Steinberg resolution differential.

    A pair i < j is good when the other basis lines span a symplectic W_ij
    of genus one less; v_i, v_j are projected into W_ij^perp inside W and
    joined in front of the W^perp pairs, with sign (-1)^(i+j-1).
    """
    W, vlines, pairs = rep
    g = lat.genus(W)
    out = []
    for i, j in itertools.combinations(range(len(vlines)), 2):
        rest = vlines[:i] + vlines[i + 1:j] + vlines[j + 1:]
        Wij = lat.span(rest)
        if lat.dim_of(Wij) != 2 * (g - 1) or lat.genus(Wij) != g - 1:
            continue
        if Wij == lat.zero:
            wi, wj = vlines[i], vlines[j]
        else:
            wi, wj = lat.project(Wij, vlines[i]), lat.project(Wij, vlines[j])
        out.append(((Wij, rest, ((wi, wj),) + tuple(pairs)), (-1) ** (i + j - 1)))
    return out


def v0_style_pairs(lat: Lattice, U: int) -> list[tuple[tuple[int, int], ...]]:
    """Line-pair sequences of ordered genus-1 decompositions of U (apartment data)."""
    if U == lat.zero:
        return [()]
    g = lat.genus(U)
    out = []
    for dec in lat.decompositions((1,) * g, U):
        pools = [list(itertools.combinations(lat.lines_in(W), 2)) for W in dec]
        pools = [[pr for pr in pool if lat.pairing[pr[0]][pr[1]]] for pool in pools]
        for combo in itertools.product(*pools):
            out.append(tuple(combo))
    return out


class _Echelon:
    """Greedy independence test mod a large prime, for choosing spanning sets."""

    def __init__(self, ell: int = 1000003):
        self.ell = ell
        self.rows: dict[int, dict[int, int]] = {}

    def add(self, v: dict) -> bool:
        ell = self.ell
        v = {i: x % ell for i, x in v.items() if x % ell}
        while v:
            p = min(v)
            row = self.rows.get(p)
            if row is None:
                inv = pow(v[p], ell - 2, ell)
                self.rows[p] = {i: x * inv % ell for i, x in v.items()}
                return True
            a = v[p]
            for i, x in row.items():
                y = (v.get(i, 0) - a * x) % ell
                if y:
                    v[i] = y
                else:
                    v.pop(i, None)
        return False

    def __len__(self):
        return len(self.rows)


def _spanning(items, coords, target: int, seed: int = 0):
    """Greedy subset of items whose coordinate vectors reach rank `target`."""
    import random

    order = list(items)
    random.Random(seed).shuffle(order)
    ech = _Echelon()
    chosen = []
    for it in order:
        if ech.add(coords(it)):
            chosen.append(it)
            if len(ech) == target:
                break
    return chosen


def steinberg_resolution(lat: Lattice, seed: int = 0) -> SteinbergResolution:
    n = lat.dim // 2
    positions = {g: _position(lat, g) for g in range(n + 1)}
    reps: dict[int, list] = {}
    domain: dict[int, SparseMat] = {}
    maps: dict[int, SparseMat] = {}
    composites: dict[int, bool] = {}
    for g in range(n, 0, -1):
        pos = positions[g]
        chosen = []
        for W in pos.summands:
            a_rank, b_rank = pos.sizes[W]
            bases = [gen.lines for gen in sh_basis(W, 0, lat)]
            m1 = steinberg_model(lat, W)
            bsel = _spanning(bases, lambda ls: dict(enumerate(m1.apartment(ls))), a_rank, seed)
            U = lat.perp(W)
            m2 = symplectic_steinberg_model(lat, U)
            psel = _spanning(v0_style_pairs(lat, U), lambda pr: dict(enumerate(m2.join_class(pr))), b_rank, seed)
            chosen += [(W, b, pr) for b in bsel for pr in psel]
        reps[g] = chosen
        domain[g] = SparseMat(pos.dim, len(chosen), [rep_coords(lat, pos, r) for r in chosen])
        target = positions[g - 1]
        cols = []
        zero = True
        for r in chosen:
            col: dict[int, int] = {}
            second: dict[int, int] = {}
            for t, c in resolution_differential(lat, r):
                for i, x in rep_coords(lat, target, t).items():
                    col[i] = col.get(i, 0) + c * x
                if g >= 2:
                    below = positions[g - 2]
                    for t2, c2 in resolution_differential(lat, t):
                        for i, x in rep_coords(lat, below, t2).items():
                            second[i] = second.get(i, 0) + c * c2 * x
            cols.append({i: x for i, x in col.items() if x})
            if any(second.values()):
                zero = False
        maps[g] = SparseMat(target.dim, len(chosen), cols)
        if g >= 2:
            composites[g] = zero
    return SteinbergResolution(lat, positions, reps, domain, maps, composites)


def check_steinberg_resolution_exact(lat: Lattice, mode: str = "auto", seed: int = 0) -> dict:
    res = steinberg_resolution(lat, seed)
    n = lat.dim // 2
    dims = {g: res.positions[g].dim for g in range(n + 1)}
    spans = {g: rank(res.domain[g], mode, seed) == dims[g] for g in res.domain}
    ranks = {g: rank(res.maps[g], mode, seed) for g in res.maps}
    spots = []
    for g in range(n, -1, -1):
        r_in = ranks.get(g + 1, 0)
        r_out = ranks.get(g, 0)
        spots.append({"position": g, "dim": dims[g], "rank_in": r_in, "rank_out": r_out, "ok": r_in + r_out == dims[g]})
    ok = all(s["ok"] for s in spots) and all(spans.values()) and all(res.composites_zero.values())
    return {
        "dims": [dims[g] for g in range(n, -1, -1)],
        "ranks": {str(g): ranks[g] for g in sorted(ranks, reverse=True)},
        "generators_span": spans,
        "composites_zero": res.composites_zero,
        "spots": spots,
        "exact": ok,
        "failed": [s["position"] for s in spots if not s["ok"]],
    }


# ----------------------------------------------------------------- presentation

@dataclass
class PresentationData:
    V0: GradedModule
    V11: GradedModule
    V12: GradedModule
    V2: GradedModule
    d1: SparseMat
    d2: SparseMat
    aug: SparseMat

    @property
    def V1(self) -> GradedModule:
        return GradedModule(1, self.V11.gens + self.V12.gens)


def _classify(lat: Lattice, g: TensorGen) -> str:
    n = lat.dim // 2
    gen2 = [i for i, (W, _) in enumerate(g) if lat.genus(W) == 2]
    ks = [len(ls) - lat.dim_of(W) for W, ls in g]
    if len(g) == n and sum(ks) == 0:
        return "V0"
    if len(g) == n and sum(ks) == 1:
        return "V11"
    if len(g) == n - 1 and len(gen2) == 1 and sum(ks) == 0:
        return "V12"
    if len(g) == n - 1 and len(gen2) == 1 and ks[gen2[0]] == 1 and sum(ks) == 1:
        return "V2"
    return "other"


def build_presentation(lat: Lattice, with_d2: bool = True, modules: dict | None = None) -> PresentationData:
    modules = modules or {}
    V0 = modules.get(0) or enum_degree_terms(lat, 0)
    deg1 = modules.get(1) or enum_degree_terms(lat, 1)
    V11 = GradedModule(1, [g for g in deg1.gens if _classify(lat, g) == "V11"])
    V12 = GradedModule(1, [g for g in deg1.gens if _classify(lat, g) == "V12"])
    V1 = GradedModule(1, V11.gens + V12.gens)
    d1 = differential(lat, V1, V0)
    if with_d2 and lat.dim >= 4:
        V2 = GradedModule(2, list(_v2_gens(lat)))
        d2 = differential(lat, V2, V1)
    else:
        V2 = GradedModule(2, [])
        d2 = SparseMat(len(V1), 0)
    return PresentationData(V0, V11, V12, V2, d1, d2, augmentation_matrix(lat, V0))


def _v2_gens(lat: Lattice):
    n = lat.dim // 2
    cache: dict = {}
    for pos in range(n - 1):
        sig = tuple(2 if t == pos else 1 for t in range(n - 1))
        kv = tuple(1 if t == pos else 0 for t in range(n - 1))
        for dec in lat.decompositions(sig):
            pools = [_factor_basis(lat, W, k, cache) for W, k in zip(dec, kv)]
            for combo in itertools.product(*pools):
                yield tuple(zip(dec, combo))


def check_presentation_exact(lat: Lattice, pres: PresentationData | None = None, mode: str = "auto", seed: int = 0) -> dict:
    pres = pres or build_presentation(lat, with_d2=False)
    dim0 = len(pres.V0)
    r_aug = rank(pres.aug, mode, seed)
    r_d1 = rank(pres.d1, mode, seed)
    contained = (pres.aug @ pres.d1).is_zero()
    ok = contained and r_d1 == dim0 - r_aug
    st = symplectic_steinberg_model(lat, lat.full).rank
    return {
        "dims": {"V0": dim0, "V11": len(pres.V11), "V12": len(pres.V12)},
        "rank_aug": r_aug,
        "rank_d1": r_d1,
        "coker_d1": dim0 - r_d1,
        "steinberg_rank": st,
        "surjective": r_aug == st,
        "image_in_kernel": contained,
        "exact": ok,
    }


def low_degree_d1(lat: Lattice, g: TensorGen) -> FormalSum:
    """d1 on V11/V12 by the specialized low-degree formulas (cross-check only).

    V11: [u, v, w] -> [v, w] - [u, w] + [u, v] in its slot. V12: for kept
    positions j1 < j2 of the genus-2 factor spanning a genus-1 plane X, the
    factor becomes [w, x][y, z] (y, z the projections of the other two lines
    onto X^perp) with sign (-1)^(j1 + j2 + n - 1 - i), i the 1-based slot.
    """
    n = lat.dim // 2
    kind = _classify(lat, g)
    out = FormalSum()
    if kind == "V11":
        slot = next(t for t, (W, ls) in enumerate(g) if len(ls) == 3)
        W, ls = g[slot]
        for t in range(3):
            rest = ls[:t] + ls[t + 1:]
            if lat.span(rest) == W:
                out.add(g[:slot] + ((W, rest),) + g[slot + 1:], (-1) ** t)
        return out
    if kind != "V12":
        raise ValueError("expected a V11 or V12 generator")
    slot = _genus2_factor(lat, g)
    W, ls = g[slot]
    for j1, j2 in itertools.combinations(range(4), 2):
        X = lat.span((ls[j1], ls[j2]))
        if not lat.pairing[ls[j1]][ls[j2]]:
            continue
        r1, r2 = [t for t in range(4) if t not in (j1, j2)]
        y, z = lat.project(X, ls[r1]), lat.project(X, ls[r2])
        if y < 0 or z < 0 or y == z:
            continue
        k2, s2 = sort_with_sign((y, z))
        nu = j1 + j2 + n - 1 - (slot + 1)
        term = g[:slot] + ((X, (ls[j1], ls[j2])), (lat.span((y, z)), k2)) + g[slot + 1:]
        out.add(term, s2 * (-1) ** nu)
    return out


# ------------------------------------------------------ standard Sharblies

def _genus2_factor(lat: Lattice, g: TensorGen) -> int:
    idx = [i for i, (W, ls) in enumerate(g) if lat.genus(W) == 2 and len(ls) == 4]
    if len(idx) != 1 or _classify(lat, g) != "V12":
        raise ValueError("expected a V12 generator with one genus-2 factor")
    return idx[0]


def is_standard(lat: Lattice, g: TensorGen):
    """(True, (ordering, a)) if the genus-2 factor has the standard shape, else (False, None).

    Standard means an ordering x0..x3 of its lines and a symplectic basis with
    x0 = <v1>, x1 = <v1bar>, x2 = <v2 + a v1>, x3 = <v2bar>; equivalently
    w(x0,x1), w(x2,x3) != 0 and x0, x1 perpendicular to x3, x0 perpendicular to x2.
    """
    j = _genus2_factor(lat, g)
    ls = g[j][1]
    P = lat.pairing
    for o in itertools.permutations(ls):
        x0, x1, x2, x3 = o
        if P[x0][x1] and P[x2][x3] and not P[x0][x2] and not P[x0][x3] and not P[x1][x3]:
            return True, (o, _standard_scalar(lat, o))
    return False, None


def _standard_scalar(lat: Lattice, o) -> int:
    from .symplectic import omega

    S, p = lat.space, lat.p
    v1, v1b = lat.reps[o[0]], lat.reps[o[1]]
    s = pow(omega(v1, v1b, S), p - 2, p)
    v1b = tuple(x * s % p for x in v1b)
    return omega(lat.reps[o[2]], v1b, S)


def _normal_forms(lat: Lattice, ls):
    """All (ordering, w-basis, (a,b,c,d)) normalizations of a 4-line factor."""
    from .symplectic import omega

    S, p = lat.space, lat.p
    P = lat.pairing
    inv = lambda x: pow(x % p, p - 2, p)
    for i, j in itertools.permutations(range(4), 2):
        if not P[ls[i]][ls[j]]:
            continue
        w1 = lat.reps[ls[i]]
        s = inv(omega(w1, lat.reps[ls[j]], S))
        w1b = tuple(x * s % p for x in lat.reps[ls[j]])
        X = lat.span((ls[i], ls[j]))
        rest = [t for t in range(4) if t not in (i, j)]
        for k, l in (rest, rest[::-1]):
            xk, xl = lat.reps[ls[k]], lat.reps[ls[l]]
            # components along w1, w1bar
            ak, bk = omega(xk, w1b, S), omega(w1, xk, S)
            w2 = tuple((x - ak * u - bk * v) % p for x, u, v in zip(xk, w1, w1b))
            al, bl = omega(xl, w1b, S), omega(w1, xl, S)
            yl = tuple((x - al * u - bl * v) % p for x, u, v in zip(xl, w1, w1b))
            t = omega(w2, yl, S)
            if not t or not any(w2):
                continue
            f = inv(t)
            w2b = tuple(x * f % p for x in yl)
            a, b, c, d = ak, bk, al * f % p, bl * f % p
            yield (ls[i], ls[j], ls[k], ls[l]), (w1, w1b, w2, w2b), (a, b, c, d)


def _case(abcd) -> int:
    a, b, c, d = abcd
    if a and b and c and d:
        return 3
    if a and not b and (c or d):
        return 2
    if not a and not b and c and d:
        return 1
    return 0


def reduction_level(lat: Lattice, g: TensorGen) -> int:
    """0 for standard; otherwise the least applicable reduction case (1..3)."""
    if is_standard(lat, g)[0]:
        return 0
    j = _genus2_factor(lat, g)
    best = None
    for _, _, abcd in _normal_forms(lat, g[j][1]):
        c = _case(abcd)
        if c and (best is None or c < best):
            best = c
    if best is None:
        raise AssertionError(f"no reduction case applies to {g}")
    return best


def correction_element(lat: Lattice, g: TensorGen) -> TensorGen:
    """The V2 generator whose boundary trades g for lower-level terms."""
    j = _genus2_factor(lat, g)
    W, ls = g[j]
    p = lat.p
    best = None
    for order, (w1, w1b, w2, w2b), abcd in _normal_forms(lat, ls):
        case = _case(abcd)
        if case and (best is None or case < best[0]):
            best = (case, order, (w1, w1b, w2, w2b), abcd)
    if best is None:
        raise AssertionError("no correction applies")
    case, order, (w1, w1b, w2, w2b), (a, b, c, d) = best
    vec = lambda *terms: tuple(sum(s * v[t] for s, v in terms) % p for t in range(lat.dim))
    x3 = lat.reps[order[3]]
    if case == 3:
        extra = [vec((1, w2), (a, w1)), vec((1, w2), (a, w1), (b, w1b))]
        vecs = [w1, w1b] + extra + [x3]
    elif case == 2:
        vecs = [w1, w1b, w2, vec((1, w2), (a, w1)), x3]
    else:
        vecs = [w1, w1b, vec((c, w1), (d, w1b)), w2, x3]
    lines = tuple(sorted({lat.line_of(v) for v in vecs}))
    if len(lines) != 5 or lat.span(lines) != W:
        raise AssertionError("correction element is not a valid V2 generator")
    return g[:j] + ((W, lines),) + g[j + 1:]


@dataclass
class Reduction:
    tau: FormalSum
    residual: FormalSum
    steps: int


def standard_reduce(lat: Lattice, sigma: dict, max_depth: int = 64) -> Reduction:
    """Write sigma = d(tau) + residual with residual in V11 + standard V12."""
    residual = FormalSum()
    for g, c in sigma.items():
        if _classify(lat, g) != "V12":
            raise ValueError("standard_reduce expects V12 support")
        residual.add(g, c)
    tau = FormalSum()
    depth = {g: 0 for g in residual}
    steps = 0
    while True:
        todo = [(reduction_level(lat, g), g) for g in residual if _classify(lat, g) == "V12"]
        todo = [(lv, g) for lv, g in todo if lv > 0]
        if not todo:
            break
        level, g = max(todo)
        if depth.get(g, 0) > max_depth:
            raise AssertionError("reduction depth exceeded; casework bug")
        t = correction_element(lat, g)
        D = apply_differential(lat, t)
        coeff = D.get(g, 0)
        if coeff not in (1, -1):
            raise AssertionError(f"correction boundary hits {g} with coefficient {coeff}")
        scale = residual[g] * coeff
        tau.add(t, scale)
        for h, c in D.items():
            if h != g and _classify(lat, h) == "V12" and c:
                lv = reduction_level(lat, h)
                if lv >= level:
                    raise AssertionError(f"level did not drop: {level} -> {lv}")
                depth[h] = max(depth.get(h, 0), depth.get(g, 0) + 1)
        residual.iadd(D, -scale)
        steps += 1
    return Reduction(tau, residual, steps)
