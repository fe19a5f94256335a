"""
Exact integer/rational lattices.

A Lattice is given by basis columns with Fraction entries (or only by its
Gram matrix, for lattices such as the hexagonal one that have no rational
embedding).  Volumes are carried as exact squared volumes; square roots are
only taken when a caller asks for a number.

Hermite normal form follows the reversed convention used for the column-by-
column counting argument: column j has its last nonzero entry (the pivot) in
row i_j, pivots increase with j, are positive, and every entry to the right
of a pivot in its row lies in [0, pivot).
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from . import BudgetExceeded

DEFAULT_BUDGET = 2_000_000


# --- exact matrix helpers (lists of rows of Fractions/ints) -------------------

def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(int(x))


def det(A):
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(A)
    if n == 0:
        return Fraction(1)
    M = [[_frac(x) for x in row] for row in A]
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def inverse(A):
    n = len(A)
    M = [[_frac(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(A)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [row[n:] for row in M]


def matmul(A, B):
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def transpose(A):
    return [list(r) for r in zip(*A)]


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def gram_of(columns):
    return [[dot(u, v) for v in columns] for u in columns]


def rank_q(rows):
    """Rank over Q."""
    M = [[_frac(x) for x in r] for r in rows]
    if not M:
        return 0
    r = 0
    cols = len(M[0])
    for c in range(cols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(r + 1, len(M)):
            if M[i][c] != 0:
                f = M[i][c] / M[r][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
        if r == len(M):
            break
    return r


def ceil_sqrt(q):
    """Smallest integer s >= 0 with s*s >= q (q a nonnegative rational)."""
    q = _frac(q)
    if q <= 0:
        return 0
    x = -(-q.numerator // q.denominator)
    s = math.isqrt(x)
    if s * s < x:
        s += 1
    return s


def sqrt_fraction(q, bits=64):
    """sqrt(q) exactly if q is a rational square, else floored to 2^-bits."""
    q = _frac(q)
    if q < 0:
        raise ValueError("negative square")
    a, b = q.numerator, q.denominator
    ra, rb = math.isqrt(a), math.isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    scale = 1 << bits
    return Fraction(math.isqrt(a * scale * scale // b), scale)


def rational_power(q, num, den):
    """q**(num/den) as a Fraction when exact, otherwise None."""
    q = _frac(q)
    if q <= 0:
        return None
    out = []
    for part in (q.numerator, q.denominator):
        root = _integer_root(part, den)
        if root is None:
            return None
        out.append(root ** num)
    return Fraction(out[0], out[1])


def _integer_root(x, k):
    r = round(x ** (1.0 / k)) if x < 2**1000 else None
    if r is None:
        return None
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** k == x:
            return cand
    return None


# --- integer column operations ------------------------------------------------

def _reduce_row(cols, row, idx):
    """Column gcd-operations on cols[idx] so at most one has cols[j][row] != 0.

    Returns the index (in idx) of the surviving nonzero column, or None.
    """
    while True:
        nz = [j for j in idx if cols[j][row] != 0]
        if len(nz) <= 1:
            return nz[0] if nz else None
        best = min(nz, key=lambda j: abs(cols[j][row]))
        b = cols[best]
        for j in nz:
            if j == best:
                continue
            q = cols[j][row] // b[row]
            if q:
                cols[j] = [x - q * y for x, y in zip(cols[j], b)]


def integer_kernel(rows, n):
    """Z-basis (list of integer vectors of length n) of {x in Z^n : rows x = 0}."""
    rows = [[int(x) for x in r] for r in rows]
    # columns of [A; I] under column operations
    cols = [[r[j] for r in rows] + [int(i == j) for i in range(n)] for j in range(n)]
    active = list(range(n))
    for i in range(len(rows)):
        keep = _reduce_row(cols, i, active)
        if keep is not None:
            active.remove(keep)
    h = len(rows)
    return [cols[j][h:] for j in active]


@dataclass(frozen=True)
class HnfMatrix:
    """Integer n-by-m matrix in (reversed-convention) Hermite normal form."""

    columns: tuple
    pivots: tuple

    @property
    def n(self):
        return len(self.columns[0]) if self.columns else 0

    @property
    def m(self):
        return len(self.columns)

    def rows(self):
        return [list(r) for r in zip(*self.columns)]

    def entry(self, i, j):
        return self.columns[j][i]

    def check(self):
        piv = self.pivots
        assert all(a < b for a, b in zip(piv, piv[1:]))
        for j, col in enumerate(self.columns):
            assert all(x == 0 for x in col[piv[j] + 1:])
            assert col[piv[j]] > 0
            for l in range(j + 1, self.m):
                assert 0 <= self.columns[l][piv[j]] < col[piv[j]]
        return True

    def lattice(self):
        return Lattice(self.columns)


def hnf(columns):
    """Unique reversed-convention HNF of the integer lattice spanned by columns."""
    cols = [[int(x) for x in c] for c in columns]
    if not cols:
        raise ValueError("empty basis")
    n = len(cols[0])
    active = list(range(len(cols)))
    chosen = []
    for i in range(n - 1, -1, -1):
        keep = _reduce_row(cols, i, active)
        if keep is not None:
            if cols[keep][i] < 0:
                cols[keep] = [-x for x in cols[keep]]
            chosen.append((i, cols[keep]))
            active.remove(keep)
    if any(any(cols[j]) for j in active) or active:
        raise ValueError("basis is rank deficient")
    chosen.reverse()
    pivots = [i for i, _ in chosen]
    out = [c for _, c in chosen]
    m = len(out)
    for j in range(m - 1, -1, -1):
        pj = out[j][pivots[j]]
        for l in range(j + 1, m):
            q = out[l][pivots[j]] // pj
            if q:
                out[l] = [x - q * y for x, y in zip(out[l], out[j])]
    return HnfMatrix(tuple(tuple(c) for c in out), tuple(pivots))


def to_standard_hnf(H):
    """Row- and column-reversed copy (the usual textbook orientation)."""
    n = H.n
    cols = [tuple(reversed(c)) for c in reversed(H.columns)]
    return cols, tuple(n - 1 - i for i in reversed(H.pivots))


# --- lattices ---------------------------------------------------------------

class Lattice:
    """Lattice spanned by the columns of an exact-rational n-by-m basis."""

    def __init__(self, columns, gram=None):
        if columns is None:
            if gram is None:
                raise ValueError("need a basis or a Gram matrix")
            self.basis = None
            self.gram = tuple(tuple(_frac(x) for x in row) for row in gram)
            self.ambient_dim = None
        else:
            cols = [tuple(_frac(x) for x in c) for c in columns]
            if not cols:
                raise ValueError("empty basis")
            if len({len(c) for c in cols}) != 1:
                raise ValueError("basis columns have different lengths")
            self.basis = tuple(cols)
            self.ambient_dim = len(cols[0])
            self.gram = tuple(tuple(row) for row in gram_of(cols))
        self.rank = len(self.gram)
        self._ginv = None
        self._ints = None
        if self.basis is not None:
            self._den = math.lcm(*(x.denominator for c in self.basis for x in c))
            self._scaled = tuple(tuple(int(x * self._den) for x in c) for c in self.basis)
            if self._den == 1:
                self._ints = self._scaled
        self._vol_sq = det(self.gram)
        if self._vol_sq <= 0:
            raise ValueError("basis is rank deficient (Gram determinant <= 0)")

    @classmethod
    def from_gram(cls, gram):
        return cls(None, gram=gram)

    @classmethod
    def identity(cls, n):
        return cls([[int(i == j) for i in range(n)] for j in range(n)])

    @property
    def integral(self):
        return self.basis is not None and all(x.denominator == 1 for c in self.basis for x in c)

    def int_columns(self):
        if not self.integral:
            raise ValueError("lattice is not integral")
        return [[int(x) for x in c] for c in self.basis]

    def volume_sq(self):
        return self._vol_sq

    def point(self, coeffs):
        if self.basis is None:
            return None
        n = self.ambient_dim
        if self._ints is not None:
            out = [0] * n
            for c, col in zip(coeffs, self._ints):
                if c:
                    for i in range(n):
                        out[i] += c * col[i]
            return tuple(out)
        D = self._den
        out = [0] * n
        for c, col in zip(coeffs, self._scaled):
            if c:
                for i in range(n):
                    out[i] += c * col[i]
        return tuple(Fraction(x, D) for x in out)

    def gram_inverse(self):
        if self._ginv is None:
            self._ginv = inverse(self.gram)
        return self._ginv

    def coordinates(self, x):
        """Coefficients y with B y = x if x lies in the real span, else None."""
        x = [_frac(t) for t in x]
        rhs = [dot(col, x) for col in self.basis]
        y = [sum(a * b for a, b in zip(row, rhs)) for row in self.gram_inverse()]
        n = self.ambient_dim
        back = [sum(c * col[i] for c, col in zip(y, self.basis)) for i in range(n)]
        if back != x:
            return None
        return y

    def contains(self, x):
        y = self.coordinates(x)
        return y is not None and all(t.denominator == 1 for t in y)

    def scaled(self, c):
        c = _frac(c)
        if self.basis is None:
            return Lattice.from_gram([[c * c * g for g in row] for row in self.gram])
        return Lattice([[c * x for x in col] for col in self.basis])

    def denominator(self):
        return math.lcm(*(x.denominator for c in self.basis for x in c))

    def canonical(self):
        """(D, HNF of D*B): equal for two bases iff they span the same lattice."""
        if self.basis is None:
            raise ValueError("Gram-only lattice has no canonical embedding")
        D = self.denominator()
        return D, hnf([[int(x * D) for x in c] for c in self.basis])

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def __repr__(self):
        if self.basis is None:
            return f"Lattice(gram={[[str(x) for x in r] for r in self.gram]})"
        return f"Lattice({[[str(x) for x in c] for c in self.basis]})"

    def to_json(self):
        if self.basis is None:
            raise ValueError("Gram-only lattice cannot be serialized")
        return {
            "ambient_dim": self.ambient_dim,
            "basis_columns": [[_fmt(x) for x in c] for c in self.basis],
            "integral": self.integral,
        }

    @classmethod
    def from_json(cls, data):
        L = cls(data["basis_columns"])
        if L.ambient_dim != data["ambient_dim"]:
            raise ValueError("ambient_dim does not match basis")
        return L


def _fmt(x):
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def hexagonal():
    """The hexagonal lattice, given by its Gram matrix [[1, 1/2], [1/2, 1]]."""
    return Lattice.from_gram([[1, Fraction(1, 2)], [Fraction(1, 2), 1]])


def volume(L, bits=64):
    return sqrt_fraction(L.volume_sq(), bits)


# --- derived lattices -----------------------------------------------------------

def orthogonal(L):
    """Integer vectors orthogonal to L (a primitive lattice of rank n - m)."""
    if not L.integral:
        raise ValueError("orthogonal lattice needs an integral lattice")
    if L.rank == L.ambient_dim:
        raise ValueError("full-rank lattice has trivial orthogonal lattice")
    ker = integer_kernel(L.int_columns(), L.ambient_dim)
    return Lattice(hnf(ker).columns)


def primitive_closure(L):
    """All integer points in the real span of the integral lattice L."""
    if not L.integral:
        raise ValueError("primitive closure needs an integral lattice")
    n = L.ambient_dim
    if L.rank == n:
        return Lattice.identity(n)
    perp = integer_kernel(L.int_columns(), n)
    return Lattice(hnf(integer_kernel(perp, n)).columns)


def is_primitive(L):
    return primitive_closure(L) == L


def polar(L):
    """Vectors of span(L) with integral inner products against L: B (B^T B)^-1."""
    if L.basis is None:
        raise ValueError("polar lattice needs an embedded basis")
    Ginv = L.gram_inverse()
    B = L.basis
    n = L.ambient_dim
    cols = [[sum(B[k][i] * Ginv[k][j] for k in range(L.rank)) for i in range(n)]
            for j in range(L.rank)]
    return Lattice(cols)


def project_out(L, x):
    """Orthogonal projection of x onto the complement of span(L)."""
    x = [_frac(t) for t in x]
    rhs = [dot(col, x) for col in L.basis]
    y = [sum(a * b for a, b in zip(row, rhs)) for row in L.gram_inverse()]
    par = L.point(y)
    return tuple(a - b for a, b in zip(x, par))


def factor(L):
    """The factor lattice Z^n / L = polar(orthogonal(L)) for primitive L."""
    if not is_primitive(L):
        raise ValueError("factor lattice requires a primitive lattice")
    return polar(orthogonal(L))


def unimodular_completion(columns, n):
    """Integer vectors W such that columns + W is a basis of Z^n.

    Requires the columns to span a primitive lattice.
    """
    cols = [[int(x) for x in c] for c in columns]
    m = len(cols)
    if m == 0:
        return [[int(i == j) for i in range(n)] for j in range(n)]
    # row operations V with V P = [I; 0]; work on rows of [P | I]
    rows = [[cols[j][i] for j in range(m)] + [int(i == k) for k in range(n)] for i in range(n)]
    r0 = 0
    for c in range(m):
        while True:
            nz = [i for i in range(r0, n) if rows[i][c] != 0]
            if not nz:
                raise ValueError("columns are rank deficient")
            best = min(nz, key=lambda i: abs(rows[i][c]))
            done = True
            for i in nz:
                if i != best:
                    q = rows[i][c] // rows[best][c]
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[best])]
                    if rows[i][c]:
                        done = False
            if done:
                break
        rows[r0], rows[best] = rows[best], rows[r0]
        if abs(rows[r0][c]) != 1:
            raise ValueError("lattice is not primitive")
        if rows[r0][c] < 0:
            rows[r0] = [-a for a in rows[r0]]
        for i in range(n):
            if i != r0 and rows[i][c]:
                q = rows[i][c]
                rows[i] = [a - q * b for a, b in zip(rows[i], rows[r0])]
        r0 += 1
    V = [row[m:] for row in rows]
    Vinv = inverse(V)
    for row in Vinv:
        assert all(x.denominator == 1 for x in row)
    return [[int(Vinv[i][j]) for i in range(n)] for j in range(m, n)]


# --- enumeration ----------------------------------------------------------------

def _ldl(G):
    """G = U^T diag(d) U with U unit upper triangular (exact)."""
    m = len(G)
    d = [Fraction(0)] * m
    U = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    for i in range(m):
        d[i] = G[i][i] - sum(d[k] * U[k][i] ** 2 for k in range(i))
        if d[i] <= 0:
            raise ValueError("Gram matrix is not positive definite")
        for j in range(i + 1, m):
            U[i][j] = (G[i][j] - sum(d[k] * U[k][i] * U[k][j] for k in range(i))) / d[i]
    return d, U


def fincke_pohst(G, center, radius_sq, budget=DEFAULT_BUDGET):
    """All integer c with (c - center)^T G (c - center) <= radius_sq.

    Exact rational arithmetic throughout; yields (c, q(c)) pairs.
    """
    m = len(G)
    d, U = _ldl(G)
    center = [_frac(x) for x in center]
    R2 = _frac(radius_sq)
    out = []
    c = [0] * m
    visited = 0

    def rec(i, rem):
        nonlocal visited
        if i < 0:
            out.append((tuple(c), R2 - rem))
            return
        t = sum(U[i][j] * (c[j] - center[j]) for j in range(i + 1, m))
        ctr = center[i] - t
        bound = rem / d[i]
        s = ceil_sqrt(bound)
        lo = math.floor(ctr) - s
        hi = math.ceil(ctr) + s
        for ci in range(lo, hi + 1):
            visited += 1
            if visited > budget:
                raise BudgetExceeded("lattice point enumeration", budget)
            dev = ci - ctr
            if dev * dev <= bound:
                c[i] = ci
                rec(i - 1, rem - d[i] * dev * dev)
        c[i] = 0

    if R2 >= 0:
        rec(m - 1, R2)
    return out


@dataclass(frozen=True)
class LatticePoint:
    coeffs: tuple
    vector: tuple  # None for Gram-only lattices
    dist_sq: Fraction


def enumerate_points(L, z=None, r=None, radius_sq=None, budget=DEFAULT_BUDGET, vectors=True):
    """Every x in L with |x - z| <= r, sorted by (|x - z|^2, coefficients)."""
    if radius_sq is None:
        if r is None or r < 0:
            raise ValueError("need a radius r >= 0")
        radius_sq = _frac(r) ** 2
    radius_sq = _frac(radius_sq)
    m = L.rank
    if z is None:
        c0 = [Fraction(0)] * m
        perp_sq = Fraction(0)
    else:
        if L.basis is None:
            raise ValueError("off-origin centers need an embedded basis")
        z = [_frac(t) for t in z]
        rhs = [dot(col, z) for col in L.basis]
        c0 = [sum(a * b for a, b in zip(row, rhs)) for row in L.gram_inverse()]
        par = L.point(c0)
        perp_sq = sum((a - b) ** 2 for a, b in zip(z, par))
    found = fincke_pohst(L.gram, c0, radius_sq - perp_sq, budget)
    pts = [LatticePoint(c, L.point(c) if vectors else None, q + perp_sq) for c, q in found]
    pts.sort(key=lambda p: (p.dist_sq, p.coeffs))
    return pts


def ball_volume(d, r):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * float(r) ** d


def shortest_vector(L, radius_hint=None, budget=DEFAULT_BUDGET):
    """A nonzero vector of minimum norm (ties broken by coefficient order)."""
    R2 = min(L.gram[i][i] for i in range(L.rank))
    if radius_hint is not None:
        R2 = min(R2, _frac(radius_hint) ** 2)
    pts = [p for p in enumerate_points(L, radius_sq=R2, budget=budget) if any(p.coeffs)]
    if not pts:
        # hint was too small; fall back to the basis radius, which always works
        R2 = min(L.gram[i][i] for i in range(L.rank))
        pts = [p for p in enumerate_points(L, radius_sq=R2, budget=budget) if any(p.coeffs)]
    return pts[0]


@dataclass(frozen=True)
class RankinResult:
    value: object          # Fraction when exact, else float
    min_volume_sq: Fraction
    certified: bool
    witness: tuple         # coefficient vectors of a minimizing tuple


def default_rankin_radius(L, m):
    return 2.0 * math.sqrt(m) * float(L.volume_sq()) ** (1.0 / (2 * L.rank))


def _normalize_rankin(L, m, vsq):
    n = L.rank
    exact = rational_power(L.volume_sq(), m, n)
    if exact is not None:
        return vsq / exact
    return float(vsq) / float(L.volume_sq()) ** (m / n)


def _short_vectors(L, radius_sq, budget):
    """Enumerated nonzero vectors up to sign (first nonzero coefficient > 0)."""
    out = []
    for p in enumerate_points(L, radius_sq=radius_sq, budget=budget, vectors=False):
        lead = next((x for x in p.coeffs if x), 0)
        if lead > 0:
            out.append(p.coeffs)
    return out


def _best_tuple(L, vecs, m, budget):
    G = L.gram
    gv = [[dot(u, [dot(row, v) for row in G]) for v in vecs] for u in vecs]
    best = witness = None
    count = 0
    for idx in combinations(range(len(vecs)), m):
        count += 1
        if count > budget:
            raise BudgetExceeded("rankin tuple search", budget, math.comb(len(vecs), m))
        vsq = det([[gv[i][j] for j in idx] for i in idx])
        if vsq > 0 and (best is None or vsq < best):
            best, witness = vsq, tuple(vecs[i] for i in idx)
    return best, witness


def rankin_bruteforce(L, m, radius, budget=DEFAULT_BUDGET):
    """Minimum squared volume over all m-tuples of lattice vectors with norm <= radius."""
    vecs = _short_vectors(L, _frac(radius) ** 2, budget)
    return _best_tuple(L, vecs, m, budget)


def rankin(L, m, radius=None, certify=True, budget=DEFAULT_BUDGET, pool=32):
    """gamma_{n,m}(L) = min vol(v_1..v_m)^2 / vol(L)^(2m/n).

    Gram-only or rational lattices (or certify=False): exhaustive m-tuple search
    over vectors of norm <= radius.  Integral lattices with certify=True: the
    tuple search over the `pool` shortest vectors seeds an exact branch-and-bound
    over HNF bases of sublattices, so the result is the true minimum.
    """
    n = L.rank
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= rank, got m={m}")
    if m == n:
        return RankinResult(Fraction(1), L.volume_sq(), True,
                            tuple(tuple(int(i == j) for i in range(n)) for j in range(n)))
    if m == 1:
        sv = shortest_vector(L, budget=budget)
        return RankinResult(_normalize_rankin(L, 1, sv.dist_sq), sv.dist_sq, True, (sv.coeffs,))
    if radius is None:
        radius = default_rankin_radius(L, m)
    vecs = _short_vectors(L, _frac(radius) ** 2, budget)
    if certify and L.integral:
        from .counting import min_volume_sublattice
        best, witness = _best_tuple(L, vecs[:pool], m, budget)
        if best is None:
            best, witness = _best_tuple(L, vecs, m, budget)
        if best is None:
            # the basis itself is always a valid incumbent
            best = det([[L.gram[i][j] for j in range(m)] for i in range(m)])
        res = min_volume_sublattice(L.ambient_dim, m, L.contains, H_sq=best, budget=budget)
        best = res.volume_sq
        witness = tuple(tuple(L.coordinates(c)) for c in res.lattice.columns)
        return RankinResult(_normalize_rankin(L, m, best), best, True, witness)
    best, witness = _best_tuple(L, vecs, m, budget)
    if best is None:
        raise ValueError(f"radius {radius} yields no independent {m}-tuple; increase it")
    return RankinResult(_normalize_rankin(L, m, best), best, False, witness)
