import itertools
import math

import numpy as np
import pytest

from hdcodes import BudgetExceeded
from hdcodes.complex import (ChainComplex, cube_sphere, cube_sphere_count, cup_with_set,
                             point_complex, product_complex, simplex_sphere, sphere_product,
                             torus_from_lattice)
from hdcodes.fpla import is_nondegenerate, random_code_generator
from hdcodes.lattice import Lattice
from hdcodes.lda import build_lda


def euler(C):
    return sum((-1) ** r * c for r, c in enumerate(C.counts()))


# --- simplex sphere -----------------------------------------------------------------

def test_simplex_counts():
    assert simplex_sphere(2).counts() == [4, 6, 4]
    C = simplex_sphere(4)
    assert C.count(1) == 15 and C.count(2) == 20
    for n in range(1, 6):
        C = simplex_sphere(n)
        assert C.counts() == [math.comb(n + 2, r + 1) for r in range(n + 1)]
        assert C.check_dd()


@pytest.mark.parametrize("d", [2, 3, 5])
def test_simplex_boundary_example(d):
    C = simplex_sphere(2, d)
    v = C.chain(2, [(1, 2, 3)])
    got = {lab: int(c) for lab, c in zip(C.cells[1], C.apply(2, v)) if c}
    # alternating signs, reduced mod d
    assert got == {(2, 3): 1, (1, 3): (-1) % d, (1, 2): 1}
    assert C.check_dd()


def test_simplex_betti():
    for n in (1, 2, 3, 4):
        for d in (2, 3):
            C = simplex_sphere(n, d)
            assert [C.betti(r) for r in range(n + 1)] == [1] + [0] * (n - 1) + [1]


# --- cup with a vertex set ------------------------------------------------------------

def test_cup_examples():
    C = simplex_sphere(2)
    assert C.support(1, cup_with_set(C, C.chain(0, [(2,)]), {1}, 0)) == [(1, 2)]
    assert not cup_with_set(C, C.chain(0, [(1,)]), {1}, 0).any()
    got = cup_with_set(C, C.chain(0, [(2,), (3,)]), {1}, 0)
    assert C.support(1, got) == [(1, 2), (1, 3)]
    v = C.chain(1, [(1, 2), (3, 4)])
    assert np.array_equal(cup_with_set(C, v, (), 1), v)


def test_cup_rejects_other_complexes():
    C = cube_sphere(1, 1)
    with pytest.raises(ValueError):
        cup_with_set(C, np.zeros(C.count(0), dtype=int), {1}, 0)


def test_cup_is_linear():
    rng = np.random.default_rng(0)
    C = simplex_sphere(4, 3)
    for _ in range(50):
        r = int(rng.integers(0, 3))
        a, b = (rng.integers(0, 3, C.count(r)) for _ in range(2))
        lhs = cup_with_set(C, (a + b) % 3, {2}, r)
        rhs = (cup_with_set(C, a, {2}, r) + cup_with_set(C, b, {2}, r)) % 3
        assert np.array_equal(lhs, rhs)


def _cone_holds(C, v, r):
    w = C.apply(r, v)
    return np.array_equal(C.apply(r, cup_with_set(C, w, {1}, r - 1)), w)


def test_cone_identity_exhaustive_n2():
    C = simplex_sphere(2)
    for r in (1, 2):
        for bits in itertools.product((0, 1), repeat=C.count(r)):
            assert _cone_holds(C, np.array(bits), r)


@pytest.mark.parametrize("d", [2, 3])
def test_cone_identity_sampled_n4(d):
    rng = np.random.default_rng(1)
    C = simplex_sphere(4, d)
    for _ in range(200):
        r = int(rng.integers(1, 5))
        assert _cone_holds(C, rng.integers(0, d, C.count(r)), r)


# --- cube sphere ------------------------------------------------------------------

def test_cube_sphere_examples():
    assert cube_sphere(1, 2).counts() == [8, 8]
    assert cube_sphere(1, 1).counts() == [4, 4]
    # surface of the unit 3-cube: 8 vertices, 12 edges, 6 squares
    assert cube_sphere(2, 1).counts() == [8, 12, 6]


@pytest.mark.parametrize("n,p", [(1, 1), (1, 3), (2, 1), (2, 2), (2, 3), (3, 2), (4, 1)])
def test_cube_sphere_counts_formula(n, p):
    C = cube_sphere(n, p)
    for r in range(n + 1):
        k = n + 1 - r
        closed = math.comb(n + 1, r) * (p + 1) ** k * p ** r * (1 - ((p - 1) / (p + 1)) ** k)
        assert C.count(r) == cube_sphere_count(n, p, r) == round(closed)
    assert euler(C) == 1 + (-1) ** n
    assert C.check_dd()


@pytest.mark.parametrize("n,p,d", [(1, 2, 2), (2, 2, 2), (2, 2, 3), (3, 1, 2)])
def test_cube_sphere_betti(n, p, d):
    C = cube_sphere(n, p, d)
    assert [C.betti(r) for r in range(n + 1)] == [1] + [0] * (n - 1) + [1]


# --- torus -------------------------------------------------------------------------

def test_square_torus():
    C = torus_from_lattice(Lattice([[2, 0], [0, 2]]))
    assert C.counts() == [4, 8, 4]
    assert C.check_dd()
    C3 = torus_from_lattice(Lattice([[3, 0], [0, 3]]))
    assert [C3.betti(r) for r in range(3)] == [1, 2, 1]


def test_lda_torus_counts():
    G = random_code_generator(2, 1, 2, seed=0)
    t = 0
    while not is_nondegenerate(G):
        t += 1
        G = random_code_generator(2, 1, 2, seed=0, trial=t)
    C = torus_from_lattice(build_lda(G).lattice)
    assert C.count(1) == 4


@pytest.mark.parametrize("d", [2, 3])
def test_random_torus(d):
    rng = np.random.default_rng(2)
    for _ in range(8):
        n = int(rng.integers(2, 4))
        cols = np.triu(rng.integers(-2, 3, size=(n, n)), 1) + np.diag(rng.integers(1, 4, size=n))
        L = Lattice(cols.T.tolist())
        vol = math.isqrt(int(L.volume_sq()))
        C = torus_from_lattice(L, d)
        assert C.check_dd()
        for r in range(n + 1):
            assert C.count(r) == math.comb(n, r) * vol == C.count(n - r)
        if C.count(0) <= 40:
            assert [C.betti(r) for r in range(n + 1)] == [math.comb(n, r) for r in range(n + 1)]


def test_coset_representatives_are_canonical():
    L = Lattice([[2, 1], [0, 3]])
    C = torus_from_lattice(L)
    red = C.reducer
    for x in itertools.product(range(-6, 7), repeat=2):
        y = red.reduce(x)
        assert y in set(lab[1] for lab in C.cells[0])
        assert L.contains([a - b for a, b in zip(x, y)])


def test_torus_errors():
    with pytest.raises(ValueError):
        torus_from_lattice(Lattice([[1, 0, 0], [0, 1, 0]]))
    with pytest.raises(ValueError):
        torus_from_lattice(Lattice([["1/2", 0], [0, 1]]))
    with pytest.raises(BudgetExceeded):
        torus_from_lattice(Lattice([[10, 0], [0, 10]]), budget=100)


# --- products ----------------------------------------------------------------------

def test_product_counts_convolve():
    S = cube_sphere(1, 1)
    P = product_complex(S, S)
    assert P.counts() == [16, 32, 16]
    assert P.check_dd()


def test_product_with_point():
    A = simplex_sphere(2, 3)
    P = product_complex(A, point_complex(3))
    assert P.counts() == A.counts()
    assert [P.betti(r) for r in range(3)] == [A.betti(r) for r in range(3)]


@pytest.mark.parametrize("d", [2, 3])
def test_product_kunneth(d):
    A, B = simplex_sphere(2, d), torus_from_lattice(Lattice([[2, 0], [0, 2]]), d)
    P = product_complex(A, B)
    assert P.check_dd()
    bA = [A.betti(r) for r in range(3)]
    bB = [B.betti(r) for r in range(3)]
    want = [sum(bA[i] * bB[r - i] for i in range(3) if 0 <= r - i < 3) for r in range(5)]
    assert [P.betti(r) for r in range(5)] == want


def test_s2_times_s2():
    S = simplex_sphere(2)
    P = product_complex(S, S)
    assert P.betti(2) == 2
    Q = sphere_product(2, 1)
    assert Q.check_dd() and Q.betti(2) == 2


def test_product_field_mismatch():
    with pytest.raises(ValueError):
        product_complex(simplex_sphere(1, 2), simplex_sphere(1, 3))


# --- validation and export -----------------------------------------------------------

def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        ChainComplex(4, [[()]], [np.zeros((0, 1))])
    with pytest.raises(ValueError):
        ChainComplex(2, [[(), ()]], [np.zeros((0, 2))])
    with pytest.raises(ValueError):
        simplex_sphere(0)


def test_json_export_is_stable():
    a = torus_from_lattice(Lattice([[2, 1], [0, 2]]), 3).dumps()
    b = torus_from_lattice(Lattice([[2, 1], [0, 2]]), 3).dumps()
    assert a == b
    assert sphere_product(1, 1).dumps() == sphere_product(1, 1).dumps()
