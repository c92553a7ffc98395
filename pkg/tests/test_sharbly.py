import pytest
from hypothesis import given, strategies as st

from stomega.homology import FormalSum
from stomega.lattice import linear_lattice
from stomega.sharbly import (
    SharblyGen, boundary_matrix, check_sharbly_exactness, make_gen, sh_basis, sh_boundary,
    sh_to_steinberg, steinberg_model,
)


@pytest.mark.parametrize("m,p,k", [(2, 2, 1), (2, 3, 2), (3, 2, 1), (3, 3, 1), (2, 5, 2)])
def test_exactness(m, p, k):
    lat = linear_lattice(m, p)
    r = check_sharbly_exactness(lat.full, k, lat)
    assert r["exact"], r
    assert r["steinberg_rank"] == p ** (m * (m - 1) // 2)


def test_basis_counts():
    lat = linear_lattice(2, 2)
    assert len(sh_basis(lat.full, 0, lat)) == 3
    assert len(sh_basis(lat.full, 1, lat)) == 1
    lat3 = linear_lattice(3, 2)
    # spanning triples of the 7 points of the Fano plane: 35 - 7 lines
    assert len(sh_basis(lat3.full, 0, lat3)) == 28


def test_make_gen_sign_and_errors():
    lat = linear_lattice(2, 3)
    g, s = make_gen(lat, lat.full, (3, 1))
    assert g.lines == (1, 3) and s == -1
    with pytest.raises(ValueError):
        make_gen(lat, lat.full, (1, 1))
    with pytest.raises(ValueError):
        make_gen(lat, lat.full, (1,))


def test_boundary_squares_to_zero():
    lat = linear_lattice(3, 2)
    for g in sh_basis(lat.full, 2, lat):
        acc = FormalSum()
        for h, c in sh_boundary(g, lat).items():
            if len(h.lines) > 3:
                acc.iadd(sh_boundary(h, lat), c)
        assert acc == {}


def test_augmentation_kills_boundaries():
    lat = linear_lattice(3, 3)
    for g in sh_basis(lat.full, 1, lat)[:200]:
        tot = [0] * steinberg_model(lat, lat.full).rank
        for h, c in sh_boundary(g, lat).items():
            for i, x in enumerate(sh_to_steinberg(h, lat)):
                tot[i] += c * x
        assert not any(tot)


def test_steinberg_rank_small_spaces():
    lat = linear_lattice(3, 2)
    line = lat.line_sub(0)
    assert steinberg_model(lat, line).rank == 1
