"""
Exterior powers of lattices and wedge-vector bounds.

A WedgeVector stores Plucker coordinates on the lex-ordered m-subsets of
{0..n-1}.  Coordinates are taken in the orthonormal ambient basis, so the
wedge inner product is the plain dot product of coordinate vectors.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .lattice import Lattice, _frac, det, integer_kernel, rankin, shortest_vector, sqrt_fraction


def subsets(n, m):
    return list(combinations(range(n), m))


@dataclass(frozen=True)
class WedgeVector:
    n: int
    m: int
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != math.comb(self.n, self.m):
            raise ValueError("coefficient count must be C(n, m)")

    @classmethod
    def from_dict(cls, n, m, terms):
        """terms maps sorted m-subsets to coefficients."""
        idx = {s: i for i, s in enumerate(subsets(n, m))}
        c = [Fraction(0)] * len(idx)
        for s, v in terms.items():
            c[idx[tuple(sorted(s))]] += _frac(v)
        return cls(n, m, tuple(c))

    def norm_sq(self):
        return sum(x * x for x in self.coeffs)

    def norm(self):
        return math.sqrt(self.norm_sq())

    def dot(self, other):
        return sum(a * b for a, b in zip(self.coeffs, other.coeffs))

    def __add__(self, other):
        return WedgeVector(self.n, self.m, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return WedgeVector(self.n, self.m, tuple(-a for a in self.coeffs))

    def scale(self, c):
        c = _frac(c)
        return WedgeVector(self.n, self.m, tuple(c * a for a in self.coeffs))

    def is_zero(self):
        return not any(self.coeffs)

    def terms(self):
        return {s: c for s, c in zip(subsets(self.n, self.m), self.coeffs) if c}


def wedge(*vectors):
    """Plucker coordinates of v_1 ^ ... ^ v_m: all m-by-m minors in lex order."""
    if not vectors:
        raise ValueError("need at least one vector")
    vs = [[_frac(x) for x in v] for v in vectors]
    n = len(vs[0])
    m = len(vs)
    coeffs = []
    for S in subsets(n, m):
        coeffs.append(det([[v[i] for v in vs] for i in S]))
    return WedgeVector(n, m, tuple(coeffs))


def exterior_power(L, m):
    """The lattice spanned by wedges of basis m-subsets of L."""
    if not 1 <= m <= L.rank:
        raise ValueError(f"need 1 <= m <= rank, got m={m}")
    if L.basis is None:
        G = L.gram
        idx = subsets(L.rank, m)
        return Lattice.from_gram([[det([[G[i][j] for j in T] for i in S]) for T in idx]
                                  for S in idx])
    cols = [wedge(*(L.basis[j] for j in S)).coeffs for S in subsets(L.rank, m)]
    return Lattice(cols)


def _sorted_sign(seq):
    """(sign, sorted tuple) of a sequence; sign 0 on repeats."""
    if len(set(seq)) < len(seq):
        return 0, None
    s = list(seq)
    sign = 1
    for i in range(len(s)):
        for j in range(len(s) - 1 - i):
            if s[j] > s[j + 1]:
                s[j], s[j + 1] = s[j + 1], s[j]
                sign = -sign
    return sign, tuple(s)


def plucker_residuals(X):
    """Values of all quadratic Plucker relations at X (all zero iff decomposable)."""
    n, m = X.n, X.m
    coord = dict(zip(subsets(n, m), X.coeffs))

    def p(seq):
        sign, key = _sorted_sign(seq)
        return 0 if sign == 0 else sign * coord[key]

    out = []
    if m <= 1 or m >= n - 1:
        return out
    for I in combinations(range(n), m - 1):
        for J in combinations(range(n), m + 1):
            total = Fraction(0)
            for l, j in enumerate(J):
                a = p(I + (j,))
                if a:
                    total += (-1) ** l * a * p(J[:l] + J[l + 1:])
            out.append(total)
    return out


def is_decomposable(X):
    """True iff X = x_1 ^ ... ^ x_m for real vectors x_i (exact)."""
    return all(r == 0 for r in plucker_residuals(X))


def calibration_bound(X):
    """The lower bound |X| on the volume of any cycle in the class X."""
    if X.is_zero():
        raise ValueError("zero class has no calibration bound")
    return float(sqrt_fraction(X.norm_sq()))


def _overlap_gradient(Xa, idx, V, j):
    """g with g . v = (V with column j replaced by v, X) for every v."""
    n, m = V.shape
    g = np.zeros(n)
    for c, S in zip(Xa, idx):
        if c == 0:
            continue
        sub = V[list(S), :]
        # cofactor expansion along column j
        for r, i in enumerate(S):
            minor = np.delete(np.delete(sub, r, axis=0), j, axis=1)
            g[i] += c * (-1) ** (r + j) * (np.linalg.det(minor) if m > 1 else 1.0)
    return g


def _overlap(Xa, idx, V):
    return sum(c * np.linalg.det(V[list(S), :]) for c, S in zip(Xa, idx) if c)


def best_split_overlap(X, samples=64, seed=0, sweeps=50):
    """Lower estimate of max over unit split V of (V, X).

    Always at least the best coordinate-axis wedge, which is >= |X|/sqrt(C(n,m)).
    """
    if X.is_zero():
        raise ValueError("zero wedge vector")
    if is_decomposable(X):
        return calibration_bound(X)
    n, m = X.n, X.m
    idx = subsets(n, m)
    Xa = np.array([float(c) for c in X.coeffs])
    best = float(np.max(np.abs(Xa)))
    rng = np.random.default_rng(seed)
    starts = [np.eye(n)[:, list(idx[int(np.argmax(np.abs(Xa)))])]]
    starts += [rng.standard_normal((n, m)) for _ in range(samples)]
    for V in starts:
        V, _ = np.linalg.qr(V)
        val = _overlap(Xa, idx, V)
        for _ in range(sweeps):
            for j in range(m):
                g = _overlap_gradient(Xa, idx, V, j)
                others = np.delete(V, j, axis=1)
                if others.size:
                    g = g - others @ (others.T @ g)
                ng = np.linalg.norm(g)
                if ng > 0:
                    V[:, j] = g / ng
            new = _overlap(Xa, idx, V)
            if new <= val + 1e-13:
                val = max(val, new)
                break
            val = new
        best = max(best, abs(val))
    # (V, X) <= |X| for unit V; clip float round-off
    return min(best, calibration_bound(X))


def lattice_split(X, L):
    """Is X = x_1 ^ ... ^ x_m with every x_i in L?  None when L has no embedded basis.

    The lattice vectors in the span of X form a sublattice M; any m of its
    vectors wedge to an integer multiple of the basis wedge of M, so X splits
    in L iff it is such a multiple.
    """
    if X.is_zero():
        raise ValueError("zero wedge vector")
    if not is_decomposable(X):
        return False
    if L.basis is None:
        return None
    n, m = X.n, X.m
    scale = math.lcm(*(Fraction(c).denominator for c in X.coeffs))
    coord = dict(zip(subsets(n, m), (int(c * scale) for c in X.coeffs)))
    # rows of the linear map v -> v ^ X
    A = []
    for T in combinations(range(n), m + 1):
        row = [0] * n
        for l, i in enumerate(T):
            row[i] = (-1) ** l * coord[T[:l] + T[l + 1:]]
        A.append(row)
    B = L.int_columns() if L.integral else None
    if B is None:
        den = math.lcm(*(Fraction(x).denominator for col in L.basis for x in col))
        B = [[int(x * den) for x in col] for col in L.basis]
    else:
        den = 1
    AB = [[sum(a * col[i] for i, a in enumerate(row)) for col in B] for row in A]
    ker = integer_kernel(AB, len(B))
    if len(ker) != m:
        return False
    M = [[Fraction(sum(c[j] * B[j][i] for j in range(len(B))), den) for i in range(n)] for c in ker]
    w = wedge(*M)
    i = next(j for j, c in enumerate(w.coeffs) if c)
    t = Fraction(X.coeffs[i]) / w.coeffs[i]
    return t.denominator == 1


# Hermite constants gamma_r^r, exact where known (r <= 8 and r = 24).
_HERMITE_POWER = {1: Fraction(1), 2: Fraction(4, 3), 3: Fraction(2), 4: Fraction(4),
                  5: Fraction(8), 6: Fraction(64, 3), 7: Fraction(64), 8: Fraction(256)}


def hermite_exact(r):
    if r in _HERMITE_POWER:
        return float(_HERMITE_POWER[r]) ** (1.0 / r)
    if r == 24:
        return 4.0
    return None


def hermite_upper(r):
    """Upper bound on the Hermite constant gamma_r (exact where tabulated)."""
    if r < 1:
        raise ValueError("rank must be >= 1")
    ex = hermite_exact(r)
    bound = 1 + r / 4
    return bound if ex is None else min(ex, bound)


@dataclass
class WedgeReport:
    n: int
    m: int
    shortest: WedgeVector
    shortest_norm: float
    bound: float
    decomposable: bool
    rankin_value: float
    criterion_applies: bool
    calibration_ratio: float   # |X|^2 / max split overlap, informational only
    lattice_split: object = None   # None for Gram-only lattices

    def to_json(self):
        return {"n": self.n, "m": self.m, "shortest_norm": self.shortest_norm,
                "bound": self.bound, "decomposable": self.decomposable,
                "rankin_value": self.rankin_value,
                "criterion_applies": self.criterion_applies,
                "calibration_ratio": self.calibration_ratio,
                "lattice_split": {True: "yes", False: "no", None: "unknown"}[self.lattice_split],
                "shortest_coeffs": [str(c) for c in self.shortest.coeffs]}


def shortest_wedge_report(L, m, radius=None, cap=70, seed=0):
    """Shortest vector of the m-th exterior power, its bound and split status."""
    n = L.rank
    N = math.comb(n, m)
    if N > cap:
        raise ValueError(f"exterior power rank {N} exceeds cap {cap}")
    if L.basis is None:
        raise ValueError("need an embedded basis")
    E = exterior_power(L, m)
    sv = shortest_vector(E, radius_hint=radius)
    X = WedgeVector(L.ambient_dim, m, tuple(sv.vector))
    norm = float(sqrt_fraction(sv.dist_sq))
    vol_m = float(L.volume_sq()) ** (m / (2 * n))
    bound = math.sqrt(hermite_upper(N)) * vol_m
    gamma = float(rankin(L, m).value)
    overlap = best_split_overlap(X, seed=seed)
    in_lattice = lattice_split(X, L)
    return WedgeReport(n, m, X, norm, bound, is_decomposable(X), gamma,
                       gamma > hermite_upper(N), float(X.norm_sq()) / overlap, in_lattice)
