import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hdcodes import BudgetExceeded
from hdcodes.lattice import (Lattice, ball_volume, default_rankin_radius, enumerate_points,
                             factor, hexagonal, hnf, is_primitive, orthogonal, polar,
                             primitive_closure, project_out, rankin, rankin_bruteforce,
                             shortest_vector, to_standard_hnf, unimodular_completion, volume)
from hdcodes.fpla import FpMatrix, random_code_generator, is_nondegenerate
from hdcodes.lda import build_lda


def points_in_box(L, box):
    """Integral points of L with all coordinates in [-box, box] (via membership)."""
    n = L.ambient_dim
    return {x for x in itertools.product(range(-box, box + 1), repeat=n) if L.contains(x)}


def random_integral(rng, n, m, lo=-3, hi=3):
    while True:
        cols = rng.integers(lo, hi + 1, size=(m, n)).tolist()
        L = None
        try:
            L = Lattice(cols)
        except ValueError:
            continue
        return L


def random_primitive(rng, n, m):
    return primitive_closure(random_integral(rng, n, m))


@st.composite
def int_lattices(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, n))
    cols = draw(st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n),
                         min_size=m, max_size=m))
    try:
        return Lattice(cols)
    except ValueError:
        return Lattice([[1 if i == j else 0 for i in range(n)] for j in range(m)])


# --- volume -----------------------------------------------------------------

def test_volume_examples():
    assert Lattice([[2, 1]]).volume_sq() == 5
    assert volume(Lattice([[2, 1]])) == pytest.approx(math.sqrt(5))
    assert Lattice.identity(4).volume_sq() == 1
    G = FpMatrix([[1, 0], [0, 1], [1, 2], [2, 1]], 3)
    assert build_lda(G).volume_sq() == 81


def test_rank_deficient_rejected():
    with pytest.raises(ValueError):
        Lattice([[1, 2], [2, 4]])


# --- HNF --------------------------------------------------------------------

def test_hnf_identity():
    H = hnf([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert [list(c) for c in H.columns] == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_hnf_small_example():
    H = hnf([[2, 0], [1, 1]])
    assert H.rows() == [[2, 1], [0, 1]]
    assert H.pivots == (0, 1)
    H.check()
    a = points_in_box(Lattice([[2, 0], [1, 1]]), 6)
    b = points_in_box(H.lattice(), 6)
    assert a == b


def test_hnf_template_5x3():
    # pivots at rows 2, 4, 5 (1-based) need zeros below each pivot
    rng = np.random.default_rng(3)
    for _ in range(20):
        cols = [[int(rng.integers(-3, 4)), int(rng.integers(1, 4)), 0, 0, 0],
                [int(rng.integers(-3, 4)), int(rng.integers(-3, 4)), int(rng.integers(-3, 4)),
                 int(rng.integers(1, 4)), 0],
                [int(rng.integers(-3, 4)) for _ in range(4)] + [int(rng.integers(1, 4))]]
        H = hnf(cols)
        H.check()
        assert H.pivots == (1, 3, 4)
        assert H.lattice() == Lattice(cols)


@settings(max_examples=100, deadline=None)
@given(int_lattices())
def test_hnf_idempotent_and_invariants(L):
    H = hnf(L.int_columns())
    H.check()
    assert hnf([list(c) for c in H.columns]) == H
    assert H.lattice().volume_sq() == L.volume_sq()


@settings(max_examples=60, deadline=None)
@given(int_lattices(max_n=3), st.data())
def test_hnf_canonical_under_unimodular(L, data):
    cols = [list(c) for c in L.int_columns()]
    m = len(cols)
    # random elementary column operations
    for _ in range(data.draw(st.integers(0, 5))):
        i = data.draw(st.integers(0, m - 1))
        j = data.draw(st.integers(0, m - 1))
        if i != j:
            c = data.draw(st.integers(-2, 2))
            cols[i] = [a + c * b for a, b in zip(cols[i], cols[j])]
    assert hnf(cols) == hnf(L.int_columns())
    assert points_in_box(Lattice(cols), 3) == points_in_box(L, 3)


def test_standard_hnf_conversion_keeps_lattice():
    H = hnf([[2, 0, 1], [1, 1, 0]])
    cols, pivots = to_standard_hnf(H)
    flipped = Lattice([list(reversed(c)) for c in cols])
    assert flipped == H.lattice()
    assert pivots == tuple(sorted(pivots))


# --- primitive closure ------------------------------------------------------

def test_primitive_examples():
    assert primitive_closure(Lattice([[2, 1]])) == Lattice([[2, 1]])
    assert primitive_closure(Lattice([[4, 2]])) == Lattice([[2, 1]])
    assert primitive_closure(Lattice([[3, 0], [0, 3]])) == Lattice.identity(2)
    assert is_primitive(Lattice([[2, 1]]))
    assert not is_primitive(Lattice([[4, 2]]))
    assert is_primitive(Lattice.identity(3))


@settings(max_examples=60, deadline=None)
@given(int_lattices(max_n=3))
def test_primitive_closure_contains_and_is_primitive(L):
    P = primitive_closure(L)
    assert is_primitive(P)
    assert all(P.contains(c) for c in L.int_columns())
    # [P : L]^2 = vol(L)^2 / vol(P)^2 is a perfect square integer
    idx_sq = L.volume_sq() / P.volume_sq()
    assert idx_sq.denominator == 1 and math.isqrt(idx_sq.numerator) ** 2 == idx_sq.numerator


# --- polar, orthogonal, factor -----------------------------------------------

def test_polar_examples():
    P = polar(Lattice([[2, 1]]))
    assert P.basis == ((Fraction(2, 5), Fraction(1, 5)),)
    assert P.volume_sq() * Lattice([[2, 1]]).volume_sq() == 1
    assert polar(Lattice.identity(3)) == Lattice.identity(3)


def test_orthogonal_examples():
    O = orthogonal(Lattice([[2, 1]]))
    assert O == Lattice([[1, -2]])
    assert is_primitive(O)
    assert orthogonal(Lattice([[1, 0, 0]])) == Lattice([[0, 1, 0], [0, 0, 1]])
    with pytest.raises(ValueError):
        orthogonal(Lattice.identity(2))


def test_factor_example():
    L = Lattice([[2, 1]])
    F = factor(L)
    assert F.volume_sq() == Fraction(1, 5)
    assert F.volume_sq() * L.volume_sq() == 1
    e1 = project_out(L, [1, 0])
    e2 = project_out(L, [0, 1])
    assert e1 == (Fraction(1, 5), Fraction(-2, 5))
    assert e2 == tuple(-2 * t for t in e1)
    assert F.contains(e1)
    with pytest.raises(ValueError):
        factor(Lattice([[4, 2]]))


def test_duality_random():
    rng = np.random.default_rng(1)
    for _ in range(60):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, n))
        L = random_primitive(rng, n, m)
        assert L.volume_sq() * polar(L).volume_sq() == 1
        assert L.volume_sq() * factor(L).volume_sq() == 1
        assert orthogonal(orthogonal(L)) == L


def test_projection_lands_in_factor_lattice():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, n))
        L = random_primitive(rng, n, m)
        F = factor(L)
        for x in itertools.product(range(-2, 3), repeat=n):
            assert F.contains(project_out(L, x))


def _random_span_point(rng, F):
    coeffs = [Fraction(int(rng.integers(-400, 401)), 100) for _ in range(F.rank)]
    return tuple(sum(c * F.basis[j][i] for j, c in enumerate(coeffs)) for i in range(F.ambient_dim))


def _nearest_sq(F, z, r_sq):
    pts = enumerate_points(F, z=z, radius_sq=r_sq, vectors=False)
    return min((p.dist_sq for p in pts), default=None)


def test_voronoi_diameter_bound():
    # every point of span(F) lies within sqrt(n - l) of F
    rng = np.random.default_rng(4)
    total = 0
    while total < 1000:
        n = int(rng.integers(2, 6))
        l = int(rng.integers(1, n))
        F = factor(random_primitive(rng, n, l))
        for _ in range(50):
            z = _random_span_point(rng, F)
            assert _nearest_sq(F, z, Fraction(n - l)) is not None
            total += 1


def test_voronoi_half_bound():
    # the tighter half-diameter bound derived in the proof
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        l = int(rng.integers(1, n))
        F = factor(random_primitive(rng, n, l))
        for _ in range(20):
            z = _random_span_point(rng, F)
            assert _nearest_sq(F, z, Fraction(n - l, 4)) is not None


def test_unimodular_completion():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        L = random_primitive(rng, n, int(rng.integers(1, n)))
        cols = [list(c) for c in L.int_columns()]
        W = unimodular_completion(cols, n)
        assert abs(Lattice(cols + [list(w) for w in W]).volume_sq()) == 1


# --- enumeration --------------------------------------------------------------

def test_enumerate_z2():
    Z2 = Lattice.identity(2)
    assert len(enumerate_points(Z2, r=1)) == 5
    assert len(enumerate_points(Z2, r=Fraction(3, 2))) == 9


def test_enumerate_matches_box():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        L = random_integral(rng, n, n, -2, 2)
        z = tuple(Fraction(int(rng.integers(-4, 5)), 2) for _ in range(n))
        r_sq = Fraction(int(rng.integers(1, 20)))
        got = {p.vector for p in enumerate_points(L, z=z, radius_sq=r_sq)}
        want = {x for x in points_in_box(L, 8)
                if sum((a - b) ** 2 for a, b in zip(x, z)) <= r_sq}
        assert got == want


def test_enumerate_count_bound():
    rng = np.random.default_rng(8)
    for _ in range(40):
        n = int(rng.integers(2, 5))
        l = int(rng.integers(1, n))
        F = factor(random_primitive(rng, n, l))
        d = n - l
        D = math.sqrt(d)
        for r in (0.5, 1.0, 2.0):
            z = _random_span_point(rng, F)
            count = len(enumerate_points(F, z=z, r=Fraction(r).limit_denominator(), vectors=False))
            assert count <= ball_volume(d, r + D) / math.sqrt(F.volume_sq()) + 1e-9


def test_enumerate_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_points(Lattice.identity(4), r=10, budget=100)


def test_ball_volume():
    assert ball_volume(2, 1) == pytest.approx(math.pi, rel=1e-15)
    assert ball_volume(3, 1) == pytest.approx(4 * math.pi / 3, rel=1e-15)
    assert ball_volume(1, 2) == pytest.approx(4.0, rel=1e-15)


def test_shortest_vector():
    assert shortest_vector(Lattice.identity(3)).dist_sq == 1
    assert shortest_vector(hexagonal()).dist_sq == 1
    G = random_code_generator(4, 2, 3, seed=7)
    L = build_lda(G).lattice
    sv = shortest_vector(L)
    r_sq = min(sum(x * x for x in c) for c in L.basis)
    brute = min(p.dist_sq for p in enumerate_points(L, radius_sq=r_sq) if p.dist_sq > 0)
    assert sv.dist_sq == brute


# --- Rankin --------------------------------------------------------------------

def test_rankin_examples():
    assert rankin(Lattice.identity(2), 1).value == 1
    assert rankin(Lattice.identity(3), 1).value == 1
    assert abs(float(rankin(hexagonal(), 1).value) - 2 / math.sqrt(3)) < 1e-9
    rng = np.random.default_rng(9)
    for _ in range(10):
        n = int(rng.integers(1, 5))
        assert rankin(random_integral(rng, n, n), n).value == 1


def test_rankin_scale_invariant():
    rng = np.random.default_rng(10)
    for _ in range(10):
        n = int(rng.integers(2, 4))
        L = random_integral(rng, n, n, -2, 2)
        m = int(rng.integers(1, n + 1))
        c = Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        a = rankin(L, m).value
        b = rankin(L.scaled(c), m).value
        assert float(a) == pytest.approx(float(b), rel=1e-12)


def test_rankin_certified_matches_bruteforce():
    for seed in range(2):
        G = random_code_generator(4, 2, 3, seed=seed)
        if not is_nondegenerate(G):
            continue
        L = build_lda(G).lattice
        for m in (1, 2):
            res = rankin(L, m)
            assert res.certified
            brute, _ = rankin_bruteforce(L, m, Fraction(default_rankin_radius(L, m)).limit_denominator() + 1)
            assert res.min_volume_sq == brute


def test_lattice_json_roundtrip():
    L = Lattice([[Fraction(1, 2), 1, 0], [0, 2, 3]])
    assert Lattice.from_json(L.to_json()) == L
