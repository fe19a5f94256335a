"""
Counting integral sublattices column by column.

A rank-m integral lattice K has a unique HNF basis v_1..v_m with pivot rows
i_1 < ... < i_m (0-based here).  K_a is spanned by the first a columns and
vol(K_a) = vol(K_{a-1}) |pi_{a-1}(v_a)|, where pi_{a-1} projects out
span(K_{a-1}).  Because K_{a-1} vanishes on row i_a, pi_{a-1} leaves that
coordinate alone, so |pi_{a-1}(v_a)| >= v_a[i_a] >= 1.

The admissible v_a are found from the factor lattice of the primitive
closure of K_{a-1}: each point y of it in the ball lifts to exactly det(F)
admissible columns, where M_K = M_{K^P} F.
"""

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from . import BudgetExceeded
from .fpla import random_code_generator, rng_stream
from .lattice import (DEFAULT_BUDGET, HnfMatrix, Lattice, _frac, ball_volume, dot,
                      enumerate_points, gram_of, hnf, inverse, primitive_closure,
                      unimodular_completion)


@dataclass(frozen=True)
class ColumnChain:
    """First a columns of an HNF basis in Z^n, with pivot rows."""

    n: int
    columns: tuple = ()
    pivots: tuple = ()
    proj_sq: tuple = ()   # |pi_{j-1}(v_j)|^2 for each column

    @property
    def a(self):
        return len(self.columns)

    def volume_sq(self):
        out = Fraction(1)
        for q in self.proj_sq:
            out *= q
        return out

    def lattice(self):
        return Lattice(self.columns)

    def hnf(self):
        return HnfMatrix(self.columns, self.pivots)

    def extend(self, v, pivot, proj_sq=None):
        v = tuple(int(x) for x in v)
        if proj_sq is None:
            proj_sq = _proj_sq(self.columns, v)
        return ColumnChain(self.n, self.columns + (v,), self.pivots + (pivot,),
                           self.proj_sq + (proj_sq,))

    def admissible(self, v, pivot):
        """Would v extend the chain and keep it in Hermite normal form?"""
        if self.pivots and pivot <= self.pivots[-1]:
            return False
        if v[pivot] < 1 or any(v[pivot + 1:]):
            return False
        for j, col in enumerate(self.columns):
            if not 0 <= v[self.pivots[j]] < col[self.pivots[j]]:
                return False
        return True

    @classmethod
    def from_hnf(cls, H):
        chain = cls(H.n)
        for col, piv in zip(H.columns, H.pivots):
            chain = chain.extend(col, piv)
        return chain


def _proj_sq(columns, v):
    """|pi(v)|^2 with pi the projection away from span(columns), exact."""
    v = [Fraction(x) for x in v]
    if not columns:
        return dot(v, v)
    G = gram_of([[Fraction(x) for x in c] for c in columns])
    rhs = [dot(c, v) for c in columns]
    y = [sum(a * b for a, b in zip(row, rhs)) for row in inverse(G)]
    return dot(v, v) - dot(rhs, y)


# --- primitive factorization ----------------------------------------------------

@dataclass(frozen=True)
class PrimitiveFactorization:
    M_KP: HnfMatrix
    F: tuple   # rows of the m-by-m upper triangular integer matrix

    def det_F(self):
        return math.prod(self.F[i][i] for i in range(len(self.F)))

    def reconstruct(self):
        P = self.M_KP.columns
        m = len(P)
        n = len(P[0])
        return tuple(tuple(sum(P[j][i] * self.F[j][l] for j in range(m)) for i in range(n))
                     for l in range(m))


def factorize_primitive(M):
    """M_K = M_{K^P} F with K^P the primitive closure of the lattice of M."""
    if not isinstance(M, HnfMatrix):
        M = hnf(M)
    P = hnf(primitive_closure(Lattice(M.columns)).int_columns())
    assert P.pivots == M.pivots
    m = M.m
    Pp = [[P.columns[j][P.pivots[i]] for j in range(m)] for i in range(m)]
    Mp = [[M.columns[j][M.pivots[i]] for j in range(m)] for i in range(m)]
    Pinv = inverse(Pp)
    F = [[sum(Pinv[i][t] * Mp[t][j] for t in range(m)) for j in range(m)] for i in range(m)]
    assert all(x.denominator == 1 for row in F for x in row)
    F = tuple(tuple(int(x) for x in row) for row in F)
    out = PrimitiveFactorization(P, F)
    assert out.reconstruct() == M.columns
    return out


# --- extensions ---------------------------------------------------------------

@dataclass(frozen=True)
class Extension:
    vector: tuple
    proj_sq: Fraction


def _factor_setup(chain, pivot):
    """Factor-lattice basis, lifts, and the primitive part for columns in R^{pivot+1}."""
    d = pivot + 1
    cols = [c[:d] for c in chain.columns]
    if cols:
        P = hnf(primitive_closure(Lattice(cols)).int_columns())
        W = unimodular_completion(P.columns, d)
        K = Lattice(P.columns)
        Ginv = inverse(K.gram)
        proj = []
        for w in W:
            rhs = [dot(c, w) for c in K.basis]
            y = [sum(a * b for a, b in zip(row, rhs)) for row in Ginv]
            par = K.point(y)
            proj.append([Fraction(x) - t for x, t in zip(w, par)])
        F = factorize_primitive(HnfMatrix(tuple(tuple(c) for c in cols), chain.pivots)).F
        return Lattice(proj), W, P, F
    W = [[int(i == j) for i in range(d)] for j in range(d)]
    return Lattice(W), W, None, ()


def factor_ball_points(chain, pivot, r=None, r_sq=None, budget=DEFAULT_BUDGET):
    """Factor-lattice points y with |y| <= r and y[pivot] >= 1 (plus their lifts)."""
    r_sq = _frac(r) ** 2 if r_sq is None else _frac(r_sq)
    Lam, W, P, F = _factor_setup(chain, pivot)
    # pi leaves the pivot coordinate unchanged, so test it on the integer lift
    pts = enumerate_points(Lam, radius_sq=r_sq, budget=budget, vectors=False)
    out = []
    for pt in pts:
        lift = [sum(c * w[i] for c, w in zip(pt.coeffs, W)) for i in range(pivot + 1)]
        if lift[pivot] >= 1:
            out.append((pt, lift))
    return out, P, F, len(pts)


def enumerate_extensions(chain, pivot, r=None, r_sq=None, budget=DEFAULT_BUDGET):
    """Every admissible next column v with pivot row `pivot` and |pi(v)| <= r.

    Sorted by (|pi(v)|^2, v).  Vectors have full length n (zeros below pivot).
    """
    if chain.pivots and pivot <= chain.pivots[-1]:
        raise ValueError("pivot rows must increase")
    if pivot >= chain.n:
        raise ValueError("pivot row out of range")
    r_sq = _frac(r) ** 2 if r_sq is None else _frac(r_sq)
    if r_sq < 1:
        return []
    pts, P, F, _ = factor_ball_points(chain, pivot, r_sq=r_sq, budget=budget)
    a = chain.a
    out = []
    for pt, lift in pts:
        for v in _lifts(lift, chain, P, F):
            out.append(Extension(tuple(v) + (0,) * (chain.n - pivot - 1), pt.dist_sq))
            if len(out) > budget:
                raise BudgetExceeded("column extensions", budget)
    out.sort(key=lambda e: (e.proj_sq, e.vector))
    assert all(chain.admissible(e.vector, pivot) for e in out) or a == 0
    return out


def _lifts(w, chain, P, F):
    """All v = w + k, k in the primitive part, meeting 0 <= v[i_j] < (M_K)_{i_j, j}."""
    if P is None:
        yield list(w)
        return
    a = chain.a
    piv = chain.pivots
    Pc = P.columns

    def rec(j, v):
        if j < 0:
            yield v
            return
        i = piv[j]
        step = Pc[j][i]
        top = chain.columns[j][i]
        # c with 0 <= v[i] + c*step < top
        lo = -(v[i] // step)
        hi = (top - 1 - v[i]) // step
        for c in range(lo, hi + 1):
            yield from rec(j - 1, [x + c * y for x, y in zip(v, Pc[j])])

    for v in rec(a - 1, list(w)):
        yield v


def count_column_choices(chain, pivot, r=None, r_sq=None, budget=DEFAULT_BUDGET):
    return len(enumerate_extensions(chain, pivot, r=r, r_sq=r_sq, budget=budget))


def column_count_bound(chain, pivot, r):
    """vol(K_{a-1}) V_{dim}(r + sqrt(dim)), dim = number of free coordinates."""
    dim = pivot + 1 - chain.a
    vol = math.sqrt(float(chain.volume_sq()))
    return vol * ball_volume(dim, float(r) + math.sqrt(dim))


def brute_force_extensions(chain, pivot, r, box=None):
    """Oracle: scan a coordinate box for admissible columns with |pi(v)| <= r."""
    r_sq = _frac(r) ** 2
    R = math.isqrt(int(r_sq)) + 1
    d = pivot + 1
    ranges = []
    for i in range(d):
        if i == pivot:
            ranges.append(range(1, R + 1))
        elif i in chain.pivots:
            j = chain.pivots.index(i)
            ranges.append(range(0, chain.columns[j][i]))
        else:
            span = box if box is not None else R + max((abs(x) for c in chain.columns for x in c),
                                                       default=0) * R
            ranges.append(range(-span, span + 1))
    out = []
    for v in product(*ranges):
        full = tuple(v) + (0,) * (chain.n - d)
        q = _proj_sq(chain.columns, full)
        if q <= r_sq and chain.admissible(full, pivot):
            out.append(full)
    return sorted(out)


# --- exact minimum-volume search --------------------------------------------------

@dataclass
class MinVolumeResult:
    lattice: object          # HnfMatrix or None
    volume_sq: object        # Fraction or None
    exact: bool
    nodes: int = 0


def min_volume_sublattice(n, m, accept=None, H=None, H_sq=None, budget=DEFAULT_BUDGET):
    """Minimum-volume rank-m integral lattice with every basis column accepted.

    `accept(v)` decides a single column (it must describe a group, e.g. membership
    in a fixed lattice or consistency with a code), so checking the HNF columns
    decides the lattice.  Lattices with vol > H are ignored; a `None` result
    proves none exists.  Ties go to the lexicographically smallest (pivots, columns).
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    if H_sq is None:
        if H is None:
            raise ValueError("need a volume cap H")
        H_sq = _frac(H) ** 2
    H_sq = _frac(H_sq)
    if accept is None:
        accept = lambda v: True  # noqa: E731
    best = [None, None]  # (volume_sq, key)
    nodes = [0]

    def cap():
        return best[0] if best[0] is not None else H_sq

    def rec(chain):
        a = chain.a
        if a == m:
            key = (chain.pivots, chain.columns)
            vsq = chain.volume_sq()
            if best[0] is None or vsq < best[0] or (vsq == best[0] and key < best[1]):
                best[0], best[1] = vsq, key
            return
        vol_sq = chain.volume_sq()
        lo = chain.pivots[-1] + 1 if chain.pivots else 0
        for pivot in range(lo, n - m + a + 1):
            r_sq = cap() / vol_sq
            if r_sq < 1:
                return
            for ext in enumerate_extensions(chain, pivot, r_sq=r_sq, budget=budget):
                if ext.proj_sq > cap() / vol_sq:
                    break
                nodes[0] += 1
                if nodes[0] > budget:
                    raise BudgetExceeded("sublattice search frontier", budget, nodes[0])
                if accept(ext.vector):
                    rec(chain.extend(ext.vector, pivot, ext.proj_sq))

    rec(ColumnChain(n))
    if best[0] is None:
        return MinVolumeResult(None, None, True, nodes[0])
    pivots, cols = best[1]
    return MinVolumeResult(HnfMatrix(cols, pivots), best[0], True, nodes[0])


# --- first-moment experiment ---------------------------------------------------

def code_consistent(G):
    """Predicate v -> (v mod p lies in the column span of G)."""
    from .fpla import row_reduce
    p = G.p
    rref, pivots = row_reduce(G.array.T, p)
    basis = rref[:len(pivots)]

    def accept(v):
        x = np.mod(np.asarray(v, dtype=np.int64), p)
        for row, c in zip(basis, pivots):
            if x[c]:
                x = np.mod(x - x[c] * row, p)
        return not x.any()

    return accept


def first_moment_bound(m, c, x, n):
    return m * c ** m * x ** (n - m + 1)


DESK_SCALE_NOTE = ("consistency check only: the bound is asymptotic in n - m, "
                   "which is far outside desk scale")


@dataclass
class FirstMomentReport:
    n: int
    k: int
    p: int
    m: int
    m_used: int
    c: float
    x: float
    H: float
    trials: int
    successes: int
    completed: int
    frequency: float
    ci_low: float
    ci_high: float
    bound: float
    complete: bool
    rows: list = field(default_factory=list)
    note: str = DESK_SCALE_NOTE

    @property
    def consistent(self):
        return self.frequency <= self.bound


def wilson_interval(successes, trials, confidence=0.95):
    from scipy.stats import binomtest
    if trials == 0:
        return 0.0, 1.0
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _first_moment_trial(args):
    n, k, p, m_used, H_sq, bound, seed, t, budget = args
    t0 = time.perf_counter()
    G = random_code_generator(n, k, p, seed, t)
    try:
        res = min_volume_sublattice(n, m_used, code_consistent(G), H_sq=H_sq, budget=budget)
        found = res.lattice is not None
        min_vol = math.sqrt(float(res.volume_sq)) if found else None
    except BudgetExceeded:
        found, min_vol = None, None
    ms = (time.perf_counter() - t0) * 1000
    return {"trial": t, "found": found, "min_vol": min_vol, "bound": bound, "runtime_ms": ms}


def first_moment_experiment(n, k, p, m, c, trials, seed, x=4.5, budget=DEFAULT_BUDGET,
                            workers=1):
    """Fraction of random codes admitting a consistent rank-m lattice of vol <= (cp)^min(m,n-k).

    Trial t draws its code from its own stream, so rows do not depend on `workers`.
    A trial whose search exceeds the budget is recorded with found=None.
    """
    if x <= math.sqrt(2 * math.pi * math.e):
        raise ValueError("x must exceed sqrt(2 pi e)")
    m_used = min(m, n - k)
    H = (c * p) ** m_used
    H_sq = Fraction(c).limit_denominator(10**12) ** 2 * p ** 2
    H_sq = H_sq ** m_used
    bound = first_moment_bound(m, c, x, n)
    jobs = [(n, k, p, m_used, H_sq, bound, seed, t, budget) for t in range(trials)]
    if workers > 1 and trials > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_first_moment_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        rows = [_first_moment_trial(j) for j in jobs]
    completed = sum(r["found"] is not None for r in rows)
    successes = sum(bool(r["found"]) for r in rows)
    freq = successes / completed if completed else float("nan")
    lo, hi = wilson_interval(successes, completed)
    return FirstMomentReport(n, k, p, m, m_used, c, x, H, trials, successes, completed, freq,
                             lo, hi, bound, completed == trials, rows)


# --- Rankin lower bound ---------------------------------------------------------

@dataclass
class RankinBoundReport:
    m: int
    c: float
    min_volume_sq: Fraction
    gamma: float
    rhs: float
    holds: bool


def min_consistent_volume_sq(L0, m, budget=DEFAULT_BUDGET):
    """Exact minimum squared volume of a rank-m sublattice of an LDA lattice."""
    # p e_1, ..., p e_m always qualify, so p^(2m) is a valid cap
    res = min_volume_sublattice(L0.n, m, L0.contains, H_sq=Fraction(L0.p) ** (2 * m),
                                budget=budget)
    assert res.lattice is not None
    return res.volume_sq, res.lattice


def rankin_lower_bound_check(L0, m, c, budget=DEFAULT_BUDGET):
    n, k, p = L0.n, L0.k, L0.p
    vsq, _ = min_consistent_volume_sq(L0, m, budget)
    norm = float(p) ** (-2 * m * (n - k) / n)
    gamma = float(vsq) * norm
    rhs = (c * p) ** (2 * min(m, n - k)) * norm
    return RankinBoundReport(m, c, vsq, gamma, rhs, gamma >= rhs)


# --- fixed-vector consistency probability ------------------------------------------

def fixed_vector_probability(x, n, k, p):
    """Exact P(x mod p in code(G)) over all non-degenerate n-by-k G (small n, k)."""
    from .fpla import FpMatrix, in_column_span, rank_fp
    hits = total = 0
    cols = list(product(range(p), repeat=n))
    for choice in product(range(len(cols)), repeat=k):
        G = FpMatrix(np.array([cols[i] for i in choice]).T.reshape(n, k), p)
        if rank_fp(G) < k:
            continue
        total += 1
        hits += in_column_span(G, x)
    return Fraction(hits, total)


def random_chain(n, a, rng, max_entry=3):
    """Random HNF chain with a columns in Z^n (pivot rows chosen uniformly)."""
    pivots = sorted(rng.choice(n, size=a, replace=False).tolist()) if a else []
    chain = ColumnChain(n)
    for piv in pivots:
        v = [0] * n
        v[piv] = int(rng.integers(1, max_entry + 1))
        for i in range(piv):
            if i in chain.pivots:
                j = chain.pivots.index(i)
                v[i] = int(rng.integers(0, chain.columns[j][i]))
            else:
                v[i] = int(rng.integers(-max_entry, max_entry + 1))
        chain = chain.extend(v, piv)
    return chain


__all__ = [
    "ColumnChain", "PrimitiveFactorization", "Extension", "factorize_primitive",
    "enumerate_extensions", "count_column_choices", "column_count_bound",
    "brute_force_extensions", "min_volume_sublattice", "MinVolumeResult",
    "first_moment_experiment", "FirstMomentReport", "wilson_interval", "code_consistent",
    "rankin_lower_bound_check", "min_consistent_volume_sq", "fixed_vector_probability",
    "random_chain", "rng_stream",
]
