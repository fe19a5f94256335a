"""
Chain complexes over F_d and the cellulations used for codes.

Cells are labelled by hashable tuples and stored per dimension in a fixed
order.  boundary(r) is a scipy.sparse CSC matrix from C_r to C_{r-1} with
entries reduced into [0, d).

Sign convention: a cubical cell with interval directions s_0 < s_1 < ...
has boundary sum_t (-1)^t [lower face in s_t - upper face in s_t]; simplices
use the alternating sum over deleted vertices; products use the graded
Leibniz rule d(a x b) = da x b + (-1)^dim(a) a x db.  Over F_2 all signs drop.
"""

import json
import math
from itertools import combinations, product

import numpy as np
import scipy.sparse as sp

from . import BudgetExceeded
from .fpla import FpMatrix, gf2_rank, is_prime, rank_fp
from .lattice import Lattice, hnf

CELL_BUDGET = 1 << 24


class ChainComplex:
    """Cells per dimension 0..D and sparse boundary matrices over F_d."""

    def __init__(self, d, cells, boundaries, kind="generic", meta=None):
        if not is_prime(d):
            raise ValueError(f"field size {d} is not prime")
        self.d = int(d)
        self.cells = [list(c) for c in cells]
        self.index = [{lab: i for i, lab in enumerate(c)} for c in self.cells]
        for r, c in enumerate(self.cells):
            if len(self.index[r]) != len(c):
                raise ValueError(f"duplicate cell labels in dimension {r}")
        self._bd = []
        for r, B in enumerate(boundaries):
            rows = len(self.cells[r - 1]) if r > 0 else 0
            B = sp.csc_matrix(B, dtype=np.int64)
            if B.shape != (rows, len(self.cells[r])):
                raise ValueError(f"boundary {r} has shape {B.shape}")
            B.data %= self.d
            B.eliminate_zeros()
            self._bd.append(B)
        self.kind = kind
        self.meta = meta or {}

    @property
    def dim(self):
        return len(self.cells) - 1

    def count(self, r):
        return len(self.cells[r]) if 0 <= r <= self.dim else 0

    def counts(self):
        return [len(c) for c in self.cells]

    def boundary(self, r):
        if r <= 0 or r > self.dim:
            rows = self.count(r - 1)
            return sp.csc_matrix((rows, self.count(r)), dtype=np.int64)
        return self._bd[r]

    def apply(self, r, v):
        """Boundary of the r-chain v (dense vector), reduced mod d."""
        return np.asarray(self.boundary(r) @ np.asarray(v, dtype=np.int64)).ravel() % self.d

    def check_dd(self):
        """True iff boundary(r-1) boundary(r) = 0 mod d for every r."""
        for r in range(2, self.dim + 1):
            P = (self.boundary(r - 1) @ self.boundary(r)).tocsc()
            P.data %= self.d
            if P.count_nonzero():
                return False
        return True

    def rank(self, r):
        B = self.boundary(r)
        if B.shape[0] == 0 or B.shape[1] == 0:
            return 0
        if self.d == 2:
            return gf2_rank(sparse_rows_as_ints(B))
        return rank_fp(FpMatrix(B.toarray(), self.d))

    def betti(self, r):
        if not 0 <= r <= self.dim:
            raise ValueError(f"dimension {r} out of range")
        return self.count(r) - self.rank(r) - self.rank(r + 1)

    def chain(self, r, labels):
        """Indicator vector (over F_d) of a set of r-cells, or labels->coeff dict."""
        v = np.zeros(self.count(r), dtype=np.int64)
        items = labels.items() if isinstance(labels, dict) else ((lab, 1) for lab in labels)
        for lab, c in items:
            v[self.index[r][_norm_label(lab)]] += c
        return v % self.d

    def support(self, r, v):
        return [self.cells[r][i] for i in np.nonzero(np.asarray(v) % self.d)[0]]

    def to_json(self):
        out = {"d": self.d, "kind": self.kind, "dims": []}
        for r in range(self.dim + 1):
            B = self.boundary(r).tocoo()
            trip = sorted(zip(B.row.tolist(), B.col.tolist(), B.data.tolist()), key=lambda t: (t[1], t[0]))
            out["dims"].append({"r": r, "cells": [_label_json(c) for c in self.cells[r]],
                                "boundary": [list(t) for t in trip]})
        return out

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def _norm_label(lab):
    if isinstance(lab, (set, frozenset, list)):
        return tuple(sorted(lab))
    return lab


def _label_json(lab):
    if isinstance(lab, tuple):
        return [_label_json(x) for x in lab]
    return lab


def sparse_rows_as_ints(B):
    """Rows of a 0/1 sparse matrix as Python ints (bit j = column j)."""
    R = sp.csr_matrix(B)
    out = []
    for i in range(R.shape[0]):
        cols = R.indices[R.indptr[i]:R.indptr[i + 1]]
        data = R.data[R.indptr[i]:R.indptr[i + 1]]
        x = 0
        for c, v in zip(cols.tolist(), data.tolist()):
            if v % 2:
                x ^= 1 << c
        out.append(x)
    return out


def sparse_cols_as_ints(B):
    return sparse_rows_as_ints(sp.csr_matrix(B).T)


def _assemble(cells, face_fn, d, kind, meta=None, budget=CELL_BUDGET):
    total = sum(len(c) for c in cells)
    if total > budget:
        raise BudgetExceeded("cell count", budget, total)
    index = [{lab: i for i, lab in enumerate(c)} for c in cells]
    bds = []
    for r in range(len(cells)):
        if r == 0:
            bds.append(sp.csc_matrix((0, len(cells[0])), dtype=np.int64))
            continue
        rows, cols, vals = [], [], []
        for j, lab in enumerate(cells[r]):
            for face, s in face_fn(lab):
                rows.append(index[r - 1][face])
                cols.append(j)
                vals.append(s)
        B = sp.coo_matrix((vals, (rows, cols)), shape=(len(cells[r - 1]), len(cells[r])),
                          dtype=np.int64).tocsc()
        B.sum_duplicates()
        bds.append(B)
    return ChainComplex(d, cells, bds, kind, meta)


# --- simplex sphere -------------------------------------------------------------

def simplex_sphere(n, d=2):
    """Boundary of the (n+1)-simplex on vertices 1..n+2; r-cells are (r+1)-subsets."""
    if n < 1:
        raise ValueError("need n >= 1")
    verts = range(1, n + 3)
    cells = [list(combinations(verts, r + 1)) for r in range(n + 1)]

    def faces(S):
        return [(S[:k] + S[k + 1:], (-1) ** k) for k in range(len(S))]

    return _assemble(cells, faces, d, "simplex", {"n": n})


def cup_with_set(C, v, T, r):
    """v cup T for an r-chain v on a simplex sphere: S goes to S u T if disjoint, else 0."""
    if C.kind != "simplex":
        raise ValueError("cup_with_set needs a simplex-sphere complex")
    T = tuple(sorted(T))
    v = np.asarray(v, dtype=np.int64)
    out = np.zeros(C.count(r + len(T)), dtype=np.int64) if r + len(T) <= C.dim else None
    for i in np.nonzero(v % C.d)[0]:
        S = C.cells[r][i]
        if set(S) & set(T):
            continue
        if out is None:
            raise ValueError("cup product leaves the complex")
        merged = T + S
        sign = 1
        for a in range(len(merged)):
            for b in range(a + 1, len(merged)):
                if merged[a] > merged[b]:
                    sign = -sign
        out[C.index[r + len(T)][tuple(sorted(merged))]] += sign * v[i]
    if out is None:
        return np.zeros(0, dtype=np.int64)
    return out % C.d


# --- cube-boundary sphere ------------------------------------------------------

def cube_sphere(n, p, d=2):
    """Boundary of [0, p]^(n+1) cut into unit cubes.

    A cell is a tuple of doubled coordinates: even 2x is the point x, odd 2x+1 is
    the interval [x, x+1].  Boundary cells have an even coordinate equal to 0 or 2p.
    """
    if n < 1 or p < 1:
        raise ValueError("need n >= 1 and p >= 1")
    top = 2 * p
    cells = [[] for _ in range(n + 1)]
    for lab in product(range(top + 1), repeat=n + 1):
        if any(c % 2 == 0 and c in (0, top) for c in lab):
            cells[sum(c % 2 for c in lab)].append(lab)

    return _assemble(cells, _cube_faces, d, "cube_sphere", {"n": n, "p": p})


def _cube_faces(lab):
    out = []
    t = 0
    for i, c in enumerate(lab):
        if c % 2:
            s = (-1) ** t
            out.append((lab[:i] + (c - 1,) + lab[i + 1:], s))
            out.append((lab[:i] + (c + 1,) + lab[i + 1:], -s))
            t += 1
    return out


def cube_sphere_count(n, p, r):
    """Closed-form number of r-cells on the boundary of the side-p (n+1)-cube."""
    k = n + 1 - r
    return math.comb(n + 1, r) * p ** r * ((p + 1) ** k - (p - 1) ** k)


# --- torus ------------------------------------------------------------------

class CosetReducer:
    """Canonical representatives of Z^n / L via the (upper triangular) HNF of L."""

    def __init__(self, L):
        if L.basis is None or not L.integral or L.rank != L.ambient_dim:
            raise ValueError("torus needs a full-rank integral lattice")
        self.H = hnf(L.int_columns())
        self.n = L.ambient_dim
        self.diag = [self.H.columns[j][j] for j in range(self.n)]

    def reduce(self, x):
        x = list(x)
        for j in range(self.n - 1, -1, -1):
            q = x[j] // self.diag[j]
            if q:
                col = self.H.columns[j]
                for i in range(j + 1):
                    x[i] -= q * col[i]
        return tuple(x)

    def representatives(self):
        return list(product(*(range(h) for h in self.diag)))


def torus_from_lattice(L, d=2, budget=CELL_BUDGET):
    """Unit-cube cellulation of R^n / L; r-cells (S, x) with |S| = r."""
    if not isinstance(L, Lattice):
        L = Lattice(L)
    red = CosetReducer(L)
    n = red.n
    vol = math.prod(red.diag)
    total = vol * 2 ** n
    if total > budget:
        raise BudgetExceeded("torus cell count", budget, total)
    reps = red.representatives()
    cells = [[(S, x) for S in combinations(range(n), r) for x in reps] for r in range(n + 1)]

    def faces(lab):
        S, x = lab
        out = []
        for t, i in enumerate(S):
            rest = S[:t] + S[t + 1:]
            s = (-1) ** t
            shifted = list(x)
            shifted[i] += 1
            out.append(((rest, x), s))
            out.append(((rest, red.reduce(shifted)), -s))
        return out

    meta = {"n": n, "lattice": [[int(v) for v in c] for c in L.int_columns()]}
    C = _assemble(cells, faces, d, "torus", meta, budget)
    C.reducer = red
    return C


# --- products ---------------------------------------------------------------

def point_complex(d=2):
    return ChainComplex(d, [[()]], [sp.csc_matrix((0, 1), dtype=np.int64)], "point")


def product_complex(A, B):
    """Cells (a, b) of A x B with the graded Leibniz boundary."""
    if A.d != B.d:
        raise ValueError("field mismatch")
    d = A.d
    D = A.dim + B.dim
    total = sum(A.count(i) * B.count(j) for i in range(A.dim + 1) for j in range(B.dim + 1))
    if total > CELL_BUDGET:
        raise BudgetExceeded("product cell count", CELL_BUDGET, total)
    blocks = []   # per r: list of (ra, rb, offset)
    cells = []
    for r in range(D + 1):
        lst, off, cur = [], [], 0
        for ra in range(max(0, r - B.dim), min(A.dim, r) + 1):
            rb = r - ra
            off.append((ra, rb, cur))
            lst.extend((a, b) for a in A.cells[ra] for b in B.cells[rb])
            cur += A.count(ra) * B.count(rb)
        cells.append(lst)
        blocks.append(off)
    bds = [sp.csc_matrix((0, len(cells[0])), dtype=np.int64)]
    for r in range(1, D + 1):
        target = {(ra, rb): o for ra, rb, o in blocks[r - 1]}
        parts = []
        for ra, rb, o in blocks[r]:
            nA, nB = A.count(ra), B.count(rb)
            if ra > 0:
                K = sp.kron(A.boundary(ra), sp.identity(nB, dtype=np.int64, format="csc"))
                parts.append((target[(ra - 1, rb)], o, K))
            if rb > 0:
                K = (-1) ** ra * sp.kron(sp.identity(nA, dtype=np.int64, format="csc"),
                                         B.boundary(rb))
                parts.append((target[(ra, rb - 1)], o, K))
        rows, cols, vals = [], [], []
        for ro, co, K in parts:
            K = K.tocoo()
            rows.append(K.row + ro)
            cols.append(K.col + co)
            vals.append(K.data)
        if rows:
            Bm = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(len(cells[r - 1]), len(cells[r])), dtype=np.int64).tocsc()
        else:
            Bm = sp.csc_matrix((len(cells[r - 1]), len(cells[r])), dtype=np.int64)
        bds.append(Bm)
    meta = {"factors": [A.meta, B.meta], "split": (A.dim, B.dim)}
    C = ChainComplex(d, cells, bds, "product", meta)
    C.factors = (A, B)
    return C


def sphere_product(n, p, d=2):
    """S^n x S^n from two cube-boundary spheres."""
    S = cube_sphere(n, p, d)
    C = product_complex(S, S)
    C.kind = "sphere_product"
    C.meta = {"n": n, "p": p}
    return C
