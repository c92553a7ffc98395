import random

import pytest
from hypothesis import given, strategies as st

from stomega.congruence import (
    IntegralSymplecticBasis, apartment_term, check_relation_lifts, identity_basis, lift_v0_generator,
    mod_p_reduce, random_integral_basis, random_relation, reduce_sum, relation_instance, unit_surjectivity,
)
from stomega.homology import FormalSum
from stomega.lattice import symplectic_lattice
from stomega.symp_sharbly import enum_degree_terms, tg_check


@given(st.integers(1, 2), st.integers(0, 10**6))
def test_random_basis_is_symplectic(n, seed):
    B = random_integral_basis(n, 10, seed)
    assert B.is_symplectic() and B.height <= 10
    assert random_integral_basis(n, 10, seed) == B


def test_genus_one_determinant():
    for seed in range(20):
        (a, c), (b, d) = random_integral_basis(1, 10, seed).cols
        assert a * d - b * c == 1


def test_height_bound_failure():
    with pytest.raises(RuntimeError):
        random_integral_basis(3, 0, 1)


def test_identity_reduction():
    lat = symplectic_lattice(2, 3)
    g, s = mod_p_reduce(identity_basis(2), 3)
    e = lambda *v: lat.line_of(v)
    want = ((lat.span((e(1, 0, 0, 0), e(0, 1, 0, 0))), tuple(sorted((e(1, 0, 0, 0), e(0, 1, 0, 0))))),
            (lat.span((e(0, 0, 1, 0), e(0, 0, 0, 1))), tuple(sorted((e(0, 0, 1, 0), e(0, 0, 0, 1))))))
    assert g == want


@pytest.mark.parametrize("p", [2, 3])
def test_unit_rescaling_invariance(p):
    B = random_integral_basis(2, 10, 5)
    C = IntegralSymplecticBasis(tuple(tuple(-x for x in c) if i in (0, 1) else c for i, c in enumerate(B.cols)))
    assert C.is_symplectic()
    assert mod_p_reduce(B, p)[0] == mod_p_reduce(C, p)[0]


def test_random_reduction_valid():
    lat = symplectic_lattice(2, 3)
    g, _ = mod_p_reduce(random_integral_basis(2, 10, 11), 3)
    tg_check(lat, g)


def test_reduction_is_linear():
    lat = symplectic_lattice(2, 3)
    rng = random.Random(0)
    terms = [apartment_term(random_integral_basis(2, 10, s).pairs()) for s in range(40)]
    for _ in range(500):
        a = FormalSum({t: rng.randint(-3, 3) for t in rng.sample(terms, 3)})
        b = FormalSum({t: rng.randint(-3, 3) for t in rng.sample(terms, 3)})
        lhs = reduce_sum(lat, a + b)
        rhs = reduce_sum(lat, a) + reduce_sum(lat, b)
        assert {k: v for k, v in lhs.items() if v} == {k: v for k, v in rhs.items() if v}


def test_relation_shapes():
    I1 = identity_basis(1)
    assert relation_instance("perm", identity_basis(2), ((0, 1), (0, 0))) == {}
    r = relation_instance("byk1", I1, (1, 1))
    e1, e1b, s = (1, 0), (0, 1), (1, 1)
    assert r == {((e1, e1b),): 1, ((e1, s),): -1, ((s, e1b),): -1}
    assert len(relation_instance("byk2", identity_basis(2), (1,))) == 3
    with pytest.raises(ValueError):
        relation_instance("byk1", I1, (2, 1))
    with pytest.raises(ValueError):
        relation_instance("perm", I1, ((0, 0), (0,)))


@pytest.mark.parametrize("n,p", [(1, 2), (1, 3), (2, 2)])
def test_v0_generators_lift(n, p):
    lat = symplectic_lattice(n, p)
    for g in enum_degree_terms(lat, 0).gens:
        B = lift_v0_generator(lat, g)
        assert B.is_symplectic()
        assert mod_p_reduce(B, p)[0] == g


@pytest.mark.parametrize("kind,n,p", [("byk1", 1, 3), ("perm", 2, 2), ("byk2", 2, 2), ("byk1", 2, 2)])
def test_relations_lift(kind, n, p):
    assert all(check_relation_lifts(random_relation(kind, n, s), p)["in_image"] for s in range(20))


def test_unit_surjectivity():
    assert unit_surjectivity(2) and unit_surjectivity(3) and not unit_surjectivity(5)


def test_p5_recorded():
    # no expectation: only that the check runs
    r = check_relation_lifts(random_relation("byk1", 1, 0), 5)
    assert isinstance(r["in_image"], bool)
