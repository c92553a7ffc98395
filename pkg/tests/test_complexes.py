import pytest

from stomega.complexes import (
    apartment_cycle, build_line_complex, build_symplectic_tits, build_tits, chain_boundary,
    chain_complex, join, lines_to_flags, relative_chain_complex, sort_with_sign,
    symplectic_apartment_cycle, symplectic_apartment_flags,
)
from stomega.gf_linalg import ResourceError
from stomega.homology import betti
from stomega.lattice import linear_lattice, symplectic_lattice

STD4 = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]


def test_sort_with_sign():
    assert sort_with_sign((3, 1, 2)) == ((1, 2, 3), 1)
    assert sort_with_sign((2, 1)) == ((1, 2), -1)
    assert sort_with_sign((1, 1))[1] == 0


def test_tits_counts():
    X = build_tits(linear_lattice(4, 2))
    assert [X.count(k) for k in range(3)] == [35 + 15 + 15, 315, 315]


@pytest.mark.parametrize("m,p,top", [(2, 2, 2), (3, 2, 8), (2, 3, 3), (3, 3, 27)])
def test_tits_top_homology(m, p, top):
    C = chain_complex(build_tits(linear_lattice(m, p)))
    assert betti(C, m - 2) == top
    assert all(betti(C, k) == 0 for k in range(-1, m - 2))


def test_apartment_is_cycle():
    lat = linear_lattice(4, 2)
    z = apartment_cycle(lat, STD4)
    assert len(z) == 24
    assert chain_boundary(z) == {}


def test_symplectic_apartment_is_cycle():
    lat = symplectic_lattice(2, 3)
    z = symplectic_apartment_cycle(lat, STD4)
    assert len(z) == 4
    assert chain_boundary(z) == {}


def test_symplectic_apartment_basis_check():
    with pytest.raises(ValueError):
        symplectic_apartment_cycle(symplectic_lattice(2, 3), [STD4[0], STD4[2], STD4[1], STD4[3]])


def test_line_join_matches_signed_apartment():
    lat = symplectic_lattice(2, 2)
    z = lines_to_flags(lat, symplectic_apartment_cycle(lat, STD4))
    a = symplectic_apartment_flags(lat, STD4)
    assert z == a or z == {k: -v for k, v in a.items()}


def test_join_shared_vertex():
    with pytest.raises(ValueError):
        join({(1,): 1}, {(1,): 1})


def test_isotropic_building_counts():
    lat = symplectic_lattice(2, 2)
    X = build_symplectic_tits(lat)
    assert X.count(0) == 15 + 15
    assert X.count(1) == 45


def test_line_complexes():
    lat = symplectic_lattice(2, 2)
    I0 = build_line_complex(lat, "I0")
    assert [I0.count(k) for k in range(3)] == [15, 45, 15]
    with pytest.raises(ResourceError):
        build_line_complex(lat, "K")
    K = build_line_complex(lat, "K", max_dim=2)
    assert K.count(2) == 455


def test_relative_complex_small():
    lat = symplectic_lattice(1, 3)
    L = build_line_complex(lat, "L")
    K = build_line_complex(lat, "K", max_dim=2)
    C = relative_chain_complex(K, L)
    # K is a skeleton of the simplex on 4 lines, L its vertex set
    assert betti(C, 1) == 3
    with pytest.raises(KeyError):
        betti(C, 2)
