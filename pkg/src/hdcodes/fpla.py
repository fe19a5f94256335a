"""
Exact linear algebra over prime fields F_p, plus the uniform random
code-generator ensemble used to build LDA lattices.

Dense matrices are numpy int64 arrays reduced mod p; nothing here touches
floating point.  GF(2) work on large sparse complexes goes through the
bit-packed helpers at the bottom (rows stored as Python ints).
"""

from itertools import product

import numpy as np


def is_prime(p):
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def rng_stream(seed, trial=0):
    """Independent PCG64 stream for (master seed, trial index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(trial)])))


class FpMatrix:
    """Immutable dense matrix over F_p."""

    __slots__ = ("p", "_a")

    def __init__(self, entries, p):
        p = int(p)
        if not is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        a = np.array(entries, dtype=np.int64)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2:
            raise ValueError("FpMatrix needs a 2d array")
        a = np.mod(a, p)
        a.setflags(write=False)
        self.p = p
        self._a = a

    @property
    def array(self):
        return self._a

    @property
    def shape(self):
        return self._a.shape

    @property
    def rows(self):
        return self._a.shape[0]

    @property
    def cols(self):
        return self._a.shape[1]

    @property
    def T(self):
        return FpMatrix(self._a.T, self.p)

    def __matmul__(self, other):
        if isinstance(other, FpMatrix):
            if other.p != self.p:
                raise ValueError("field mismatch")
            other = other._a
        return FpMatrix(np.mod(self._a @ np.asarray(other, dtype=np.int64), self.p), self.p)

    def __getitem__(self, idx):
        return self._a[idx]

    def __eq__(self, other):
        return (isinstance(other, FpMatrix) and self.p == other.p
                and self.shape == other.shape and bool(np.all(self._a == other._a)))

    def __hash__(self):
        return hash((self.p, self.shape, self._a.tobytes()))

    def __repr__(self):
        return f"FpMatrix(p={self.p}, {self._a.tolist()})"

    def tolist(self):
        return self._a.tolist()


def random_code_generator(n, k, p, seed, trial=0):
    """n-by-k code generator matrix with i.i.d. uniform entries in F_p."""
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got n={n}, k={k}")
    rng = rng_stream(seed, trial)
    return FpMatrix(rng.integers(0, p, size=(n, k)), p)


def row_reduce(a, p):
    """Reduced row echelon form mod p.  Returns (rref, pivot_columns)."""
    a = np.mod(np.array(a, dtype=np.int64), p)
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        a = (a - np.outer(col, a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank_fp(M):
    if M.rows == 0 or M.cols == 0:
        return 0
    if M.p == 2:
        return gf2_rank(pack_rows(M.array))
    return len(row_reduce(M.array, M.p)[1])


def nullspace_fp(M):
    """Basis of {x : M x = 0} as the columns of an FpMatrix."""
    p = M.p
    rref, pivots = row_reduce(M.array, p)
    free = [c for c in range(M.cols) if c not in set(pivots)]
    basis = np.zeros((M.cols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        basis[f, j] = 1
        for i, pc in enumerate(pivots):
            basis[pc, j] = (-rref[i, f]) % p
    return FpMatrix(basis.reshape(M.cols, len(free)), p)


def is_nondegenerate(G):
    return rank_fp(G) == G.cols


def nondegenerate_probability(n, k, p):
    """prod_{j=0}^{k-1} (1 - p^{-(n-j)}) for uniform n-by-k G."""
    prob = 1.0
    for j in range(k):
        prob *= 1.0 - float(p) ** (-(n - j))
    return prob


def systematic_form(G):
    """Row permutation perm and C with G[perm] column-equivalent to [I; C].

    perm lists original row indices; the first k of them carry an invertible
    block.  The column span is unchanged up to that row relabelling.
    """
    n, k = G.shape
    p = G.p
    # pivots of the row-reduced transpose = first k independent rows of G
    _, pivots = row_reduce(G.array.T, p)
    if len(pivots) < k:
        raise ValueError("degenerate code generator matrix has no systematic form")
    rest = [i for i in range(n) if i not in set(pivots)]
    perm = list(pivots) + rest
    permuted = G.array[perm]
    A = permuted[:k]
    Ainv = inverse_fp(A, p)
    S = np.mod(permuted @ Ainv, p)
    assert np.array_equal(S[:k], np.eye(k, dtype=np.int64))
    return perm, FpMatrix(S[k:].reshape(n - k, k), p)


def inverse_fp(A, p):
    A = np.mod(np.asarray(A, dtype=np.int64), p)
    k = A.shape[0]
    aug = np.concatenate([A, np.eye(k, dtype=np.int64)], axis=1)
    rref, pivots = row_reduce(aug, p)
    if pivots[:k] != list(range(k)):
        raise ValueError("matrix is singular mod p")
    return rref[:, k:]


def codewords(G):
    """All p^k combinations G y (as a set of tuples)."""
    p = G.p
    out = set()
    for y in product(range(p), repeat=G.cols):
        out.add(tuple(int(t) for t in np.mod(G.array @ np.array(y, dtype=np.int64), p)))
    return out


def in_column_span(G, x):
    """Is x (mod p) a combination of the columns of G?"""
    x = np.mod(np.asarray(x, dtype=np.int64).reshape(-1, 1), G.p)
    aug = FpMatrix(np.concatenate([G.array, x], axis=1), G.p)
    return rank_fp(aug) == rank_fp(G)


# --- bit-packed GF(2) -------------------------------------------------------

def pack_rows(a):
    """Rows of a 0/1 array as Python ints (bit j = column j)."""
    a = np.asarray(a) & 1
    weights = [1 << j for j in range(a.shape[1])]
    return [sum(w for w, bit in zip(weights, row) if bit) for row in a.tolist()]


def gf2_echelon(rows):
    """Echelon basis {leading bit: row} of the span of integer-encoded rows."""
    basis = {}
    for r in rows:
        while r:
            lead = r.bit_length() - 1
            b = basis.get(lead)
            if b is None:
                basis[lead] = r
                break
            r ^= b
    return basis


def gf2_rank(rows):
    return len(gf2_echelon(rows))


def gf2_reduce(x, basis):
    while x:
        lead = x.bit_length() - 1
        b = basis.get(lead)
        if b is None:
            return x
        x ^= b
    return 0


def gf2_nullspace(rows, ncols):
    """Basis (as ints over ncols bits) of {x : <row, x> = 0 for every row}."""
    # full reduction to RREF keyed by pivot column
    piv = {}
    for r in rows:
        for c, b in piv.items():
            if (r >> c) & 1:
                r ^= b
        if not r:
            continue
        c = r.bit_length() - 1
        for c2 in list(piv):
            if (piv[c2] >> c) & 1:
                piv[c2] ^= r
        piv[c] = r
    free = [c for c in range(ncols) if c not in piv]
    out = []
    for f in free:
        x = 1 << f
        for c, b in piv.items():
            if (b >> f) & 1:
                x |= 1 << c
        out.append(x)
    return out
