"""Lee-Szczarba Sharbly resolution of St(W): spanning line sets and the omit boundary."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .complexes import apartment_cycle, build_tits, chain_complex, flags_to_vector, sort_with_sign
from .gf_linalg import DEFAULT_BUDGET, ResourceError, Subspace
from .homology import FormalSum, HomologyBasis, SparseMat, homology_coords, rank
from .lattice import Lattice, linear_lattice


@dataclass(frozen=True, order=True)
class SharblyGen:
    space: int
    lines: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.lines)


def _resolve(W, lat: Lattice | None) -> tuple[Lattice, int]:
    if isinstance(W, Subspace):
        lat = lat or linear_lattice(W.ambient, W.p)
        return lat, lat.sid(W)
    if lat is None:
        raise ValueError("a subspace id needs its lattice")
    return lat, W


def degree(lat: Lattice, g: SharblyGen) -> int:
    return len(g.lines) - lat.dim_of(g.space)


def make_gen(lat: Lattice, W: int, lines) -> tuple[SharblyGen, int]:
    """Canonical generator for an ordered line tuple, with the sorting sign."""
    key, sign = sort_with_sign(lines)
    if sign == 0:
        raise ValueError("Sharbly generators need distinct lines")
    inside = set(lat.lines_in(W))
    if not set(key) <= inside:
        raise ValueError("line outside the subspace")
    if lat.span(key) != W:
        raise ValueError("lines do not span the subspace")
    return SharblyGen(W, key), sign


def sh_basis(W, k: int, lat: Lattice | None = None, budget: int = DEFAULT_BUDGET) -> list[SharblyGen]:
    lat, w = _resolve(W, lat)
    lines = lat.lines_in(w)
    size = lat.dim_of(w) + k
    from math import comb

    if comb(len(lines), size) > budget:
        raise ResourceError("Sharbly basis exceeds budget")
    out = []
    for s in itertools.combinations(lines, size):
        if lat.span(s) == w:
            out.append(SharblyGen(w, s))
    return out


def sh_boundary(g: SharblyGen, lat: Lattice) -> FormalSum:
    if len(g.lines) <= lat.dim_of(g.space):
        raise ValueError("degree-0 generators map to Steinberg; use sh_to_steinberg")
    out = FormalSum()
    for i in range(len(g.lines)):
        rest = g.lines[:i] + g.lines[i + 1:]
        if lat.span(rest) == g.space:
            out.add(SharblyGen(g.space, rest), -1 if i % 2 else 1)
    return out


class SteinbergModel:
    """St(W) as top reduced homology of the building of W, with integral coordinates."""

    def __init__(self, lat: Lattice, W: int):
        self.lat, self.space = lat, W
        d = lat.dim_of(W)
        if d <= 1:
            self.building = None
            self.coords = None
            self.rank = 1
            return
        self.building = build_tits(lat, W)
        C = chain_complex(self.building)
        self.coords: HomologyBasis = homology_coords(C, d - 2)
        self.rank = self.coords.rank

    def project_flags(self, chain: dict) -> tuple[int, ...]:
        if self.building is None:
            return (sum(chain.values()),)
        return self.coords.project(flags_to_vector(self.building, chain))

    def apartment(self, lines) -> tuple[int, ...]:
        lat = self.lat
        if self.building is None:
            return (1,) if len(lines) == lat.dim_of(self.space) else (0,)
        return self.project_flags(apartment_cycle(lat, [lat.reps[l] for l in lines]))


@lru_cache(maxsize=None)
def steinberg_model(lat: Lattice, W: int) -> SteinbergModel:
    return SteinbergModel(lat, W)


def sh_to_steinberg(g: SharblyGen, lat: Lattice) -> tuple[int, ...]:
    if len(g.lines) != lat.dim_of(g.space):
        raise ValueError("augmentation is defined on degree-0 generators")
    return steinberg_model(lat, g.space).apartment(g.lines)


def boundary_matrix(lat: Lattice, source: list[SharblyGen], target: list[SharblyGen]) -> SparseMat:
    idx = {g: i for i, g in enumerate(target)}
    cols = []
    for g in source:
        cols.append({idx[h]: c for h, c in sh_boundary(g, lat).items()})
    return SparseMat(len(target), len(source), cols)


def augmentation_matrix(lat: Lattice, gens: list[SharblyGen]) -> SparseMat:
    cols = []
    for g in gens:
        v = sh_to_steinberg(g, lat)
        cols.append({i: x for i, x in enumerate(v) if x})
    rows = steinberg_model(lat, gens[0].space).rank if gens else 0
    return SparseMat(rows, len(gens), cols)


def check_sharbly_exactness(W, k_max: int, lat: Lattice | None = None, mode: str = "auto") -> dict:
    """Rank bookkeeping for Sh_{k_max} -> ... -> Sh_0 -> St(W) -> 0."""
    lat, w = _resolve(W, lat)
    bases = [sh_basis(w, k, lat) for k in range(k_max + 1)]
    st = steinberg_model(lat, w).rank
    ranks = {0: rank(augmentation_matrix(lat, bases[0]), mode)}
    for k in range(1, k_max + 1):
        ranks[k] = rank(boundary_matrix(lat, bases[k], bases[k - 1]), mode)
    spots = []
    spots.append({"spot": "St", "ok": ranks[0] == st})
    for k in range(k_max):
        spots.append({"spot": k, "ok": ranks[k] + ranks[k + 1] == len(bases[k])})
    failed = [s["spot"] for s in spots if not s["ok"]]
    return {
        "dims": [len(b) for b in bases],
        "steinberg_rank": st,
        "ranks": [ranks[k] for k in range(k_max + 1)],
        "spots": spots,
        "exact": not failed,
        "failed": failed,
    }


def act_gen(g: SharblyGen, lat: Lattice, A, perm=None) -> tuple[SharblyGen, int]:
    perm = perm or lat.line_action(A)
    key, sign = sort_with_sign(perm[l] for l in g.lines)
    return SharblyGen(lat.sub_action(A, g.space), key), sign
