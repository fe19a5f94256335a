"""
CSS codes from chain complexes: parameters, distances, soundness, and the
chain contractions that certify soundness lower bounds.

Qudits sit on q-cells.  bd2 = boundary (q+1 -> q) has one column per
Z-stabilizer; bd1 = boundary (q -> q-1) has one row per X-stabilizer.
Z-logicals are ker bd1 mod im bd2; X-logicals are ker bd2^T mod im bd1^T.

Distance and soundness work over F_2 with vectors bit-packed into uint64 words.
"""

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from . import BudgetExceeded
from .complex import _cube_faces, cup_with_set, sparse_cols_as_ints, sparse_rows_as_ints
from .fpla import FpMatrix, gf2_echelon, gf2_nullspace, gf2_reduce, rank_fp, rng_stream

DISTANCE_BUDGET = 1 << 26
INF = math.inf


@dataclass
class CssCode:
    d: int
    N: int
    bd2: sp.csc_matrix   # N x (#Z-stabilizers)
    bd1: sp.csc_matrix   # (#X-stabilizers) x N
    q: int
    provenance: dict = field(default_factory=dict)
    complex: object = None

    def commutes(self):
        P = (self.bd1 @ self.bd2).tocsc()
        P.data %= self.d
        return P.count_nonzero() == 0

    def _rank(self, B):
        if B.shape[0] == 0 or B.shape[1] == 0:
            return 0
        if self.d == 2:
            return len(gf2_echelon(sparse_rows_as_ints(B)))
        return rank_fp(FpMatrix(B.toarray(), self.d))

    def logical_count(self):
        return self.N - self._rank(self.bd2) - self._rank(self.bd1)

    def weight(self):
        """Largest number of nonzeros in any row or column of bd2 or bd1."""
        w = 0
        for B in (self.bd2, self.bd1):
            if B.shape[0] and B.shape[1]:
                nz = (B != 0).astype(np.int64)
                w = max(w, int(nz.sum(axis=0).max()), int(nz.sum(axis=1).max()))
        return w

    def z_stabilizers(self):
        B = self.bd2.tocsc()
        return [[[int(i), int(v)] for i, v in zip(B.indices[B.indptr[j]:B.indptr[j + 1]],
                                                 B.data[B.indptr[j]:B.indptr[j + 1]])]
                for j in range(B.shape[1])]

    def x_stabilizers(self):
        B = self.bd1.tocsr()
        return [[[int(j), int(v)] for j, v in zip(B.indices[B.indptr[i]:B.indptr[i + 1]],
                                                 B.data[B.indptr[i]:B.indptr[i + 1]])]
                for i in range(B.shape[0])]

    def to_json(self):
        return {"d": self.d, "N": self.N, "q": self.q, "provenance": self.provenance,
                "z_stabilizers": self.z_stabilizers(), "x_stabilizers": self.x_stabilizers()}

    @classmethod
    def from_json(cls, data):
        N = data["N"]
        zs, xs = data["z_stabilizers"], data["x_stabilizers"]
        r, c, v = [], [], []
        for j, stab in enumerate(zs):
            for i, val in stab:
                r.append(i)
                c.append(j)
                v.append(val)
        bd2 = sp.csc_matrix((v, (r, c)), shape=(N, len(zs)), dtype=np.int64)
        r, c, v = [], [], []
        for i, stab in enumerate(xs):
            for j, val in stab:
                r.append(i)
                c.append(j)
                v.append(val)
        bd1 = sp.csc_matrix((v, (r, c)), shape=(len(xs), N), dtype=np.int64)
        return cls(data["d"], N, bd2, bd1, data.get("q", 1), data.get("provenance", {}))


def from_complex(C, q):
    if not 0 <= q <= C.dim:
        raise ValueError(f"q must lie in 0..{C.dim}, got {q}")
    code = CssCode(C.d, C.count(q), C.boundary(q + 1).tocsc(), C.boundary(q).tocsc(), q,
                   {"builder": C.kind, "q": q, **{k: v for k, v in C.meta.items()
                                                   if isinstance(v, (int, str, list))}}, C)
    assert code.commutes()
    return code


def alist(H):
    """Sparse 0/1 matrix in alist form (1-indexed, no zero padding)."""
    H = sp.csc_matrix(H)
    m, n = H.shape
    cols = [sorted((H.indices[H.indptr[j]:H.indptr[j + 1]] + 1).tolist()) for j in range(n)]
    R = H.tocsr()
    rows = [sorted((R.indices[R.indptr[i]:R.indptr[i + 1]] + 1).tolist()) for i in range(m)]
    lines = [f"{n} {m}",
             f"{max((len(c) for c in cols), default=0)} {max((len(r) for r in rows), default=0)}",
             " ".join(str(len(c)) for c in cols),
             " ".join(str(len(r)) for r in rows)]
    lines += [" ".join(map(str, c)) for c in cols]
    lines += [" ".join(map(str, r)) for r in rows]
    return "\n".join(lines) + "\n"


# --- bit-packed helpers --------------------------------------------------------

def _words(N):
    return max(1, (N + 63) // 64)


def _to_words(x, W):
    return np.array([(x >> (64 * i)) & 0xFFFFFFFFFFFFFFFF for i in range(W)], dtype=np.uint64)


def _span_table(vecs, W):
    """All 2^k XOR-combinations of the given ints, as a (2^k, W) uint64 array."""
    arr = np.zeros((1, W), dtype=np.uint64)
    for v in vecs:
        arr = np.concatenate([arr, arr ^ _to_words(v, W)])
    return arr


def _sig_table(sigs):
    arr = np.zeros(1, dtype=np.uint64)
    for s in sigs:
        arr = np.concatenate([arr, arr ^ np.uint64(s)])
    return arr


def _popcount_rows(arr):
    return np.bitwise_count(arr).sum(axis=1, dtype=np.int64)


def _parity(x):
    return x.bit_count() & 1


# --- homology ------------------------------------------------------------------

@dataclass
class SideData:
    """Checks, stabilizers, kernel basis and class signatures for one side."""
    N: int
    checks: list       # ints; kernel = vectors orthogonal to all of them
    stabs: list        # ints spanning the trivial subspace
    kernel: list       # basis of the kernel
    cohom: list        # K representatives pairing nondegenerately with homology
    sigs: list         # class signature of each kernel basis vector

    def signature(self, v):
        s = 0
        for i, c in enumerate(self.cohom):
            if _parity(v & c):
                s |= 1 << i
        return s


def side_data(code, side="Z"):
    if code.d != 2:
        raise ValueError("distance and soundness are implemented over F_2 only")
    N = code.N
    z_checks = sparse_rows_as_ints(code.bd1)     # rows of bd1
    z_stabs = sparse_cols_as_ints(code.bd2)      # columns of bd2
    if side == "Z":
        checks, stabs, dual_checks, dual_stabs = z_checks, z_stabs, z_stabs, z_checks
    elif side == "X":
        checks, stabs, dual_checks, dual_stabs = z_stabs, z_checks, z_checks, z_stabs
    else:
        raise ValueError("side must be 'Z' or 'X'")
    kernel = gf2_nullspace(checks, N)
    # cohomology: kernel of the dual checks, modulo the span of the dual stabilizers
    co = gf2_nullspace(dual_checks, N)
    ech = gf2_echelon(dual_stabs)
    reps = []
    for c in co:
        r = gf2_reduce(c, ech)
        if r:
            reps.append(c)
            lead = r.bit_length() - 1
            ech[lead] = r
    sd = SideData(N, checks, stabs, kernel, reps, [])
    sd.sigs = [sd.signature(b) for b in kernel]
    return sd


def is_nontrivial(code, v, side="Z"):
    """For a cycle v (0/1 vector or int), is it outside the stabilizer span?"""
    sd = side_data(code, side)
    x = v if isinstance(v, int) else _vec_to_int(v)
    return sd.signature(x) != 0


def _vec_to_int(v):
    x = 0
    for i in np.nonzero(np.asarray(v) % 2)[0]:
        x |= 1 << int(i)
    return x


def _int_to_vec(x, N):
    return np.array([(x >> i) & 1 for i in range(N)], dtype=np.int64)


# --- distances ---------------------------------------------------------------

def _kernel_scan(sd, budget, low_bits=20):
    """Yield (weights, signatures) arrays covering every kernel vector."""
    k = len(sd.kernel)
    if 2 ** k > budget:
        raise BudgetExceeded("kernel enumeration", budget, 2 ** k)
    W = _words(sd.N)
    t = min(k, low_bits)
    low = _span_table(sd.kernel[:t], W)
    low_sig = _sig_table(sd.sigs[:t])
    high = sd.kernel[t:]
    high_sig = sd.sigs[t:]
    cur = np.zeros(W, dtype=np.uint64)
    cur_sig = np.uint64(0)
    for g in range(2 ** len(high)):
        if g:
            # Gray code: flip the basis vector at the lowest set bit of g
            j = (g & -g).bit_length() - 1
            cur = cur ^ _to_words(high[j], W)
            cur_sig = cur_sig ^ np.uint64(high_sig[j])
        yield low ^ cur, low_sig ^ cur_sig


def distance_exact(code, side="Z", budget=DISTANCE_BUDGET, witness=False):
    """Minimum weight of a nontrivial logical on the given side (inf when K = 0)."""
    sd = side_data(code, side)
    if not sd.cohom:
        return (INF, None) if witness else INF
    best, arg = INF, None
    for arr, sig in _kernel_scan(sd, budget):
        w = _popcount_rows(arr)
        w = np.where(sig != 0, w, np.iinfo(np.int64).max)
        i = int(np.argmin(w))
        if w[i] < best:
            best = int(w[i])
            arg = arr[i].copy()
    if witness:
        x = sum(int(word) << (64 * i) for i, word in enumerate(arg))
        return best, _int_to_vec(x, code.N)
    return best


def distance_cycle_q1(code, side="Z"):
    """Shortest nontrivial cycle by BFS on the (vertex, class signature) cover graph.

    Z side walks the 1-skeleton (columns of bd1 join two vertices); X side
    walks the dual graph (rows of bd2 join two top cells).  Needs q = 1, d = 2.
    """
    if code.d != 2 or code.q != 1:
        raise ValueError("cycle distance needs q = 1 over F_2")
    sd = side_data(code, side)
    if not sd.cohom:
        return INF
    inc = code.bd1.tocsc() if side == "Z" else code.bd2.T.tocsc()
    nv = inc.shape[0]
    adj = [[] for _ in range(nv)]
    loops = []
    for e in range(code.N):
        ends = inc.indices[inc.indptr[e]:inc.indptr[e + 1]].tolist()
        ends = [u for u, val in zip(ends, inc.data[inc.indptr[e]:inc.indptr[e + 1]].tolist()) if val % 2]
        s = sd.signature(1 << e)
        if len(ends) == 2:
            adj[ends[0]].append((ends[1], s))
            adj[ends[1]].append((ends[0], s))
        elif len(ends) == 0:
            loops.append(s)
        else:
            raise ValueError("qudit is not an edge of a graph on this side")
    if any(loops):
        return 1
    best = INF
    for s0 in range(nv):
        dist = {(s0, 0): 0}
        dq = deque([(s0, 0)])
        while dq:
            u, g = dq.popleft()
            du = dist[(u, g)]
            if du >= best:
                break
            for v, s in adj[u]:
                st = (v, g ^ s)
                if st not in dist:
                    dist[st] = du + 1
                    if v == s0 and st[1]:
                        best = min(best, du + 1)
                    dq.append(st)
    return best


# --- soundness -----------------------------------------------------------------

@dataclass
class SoundnessEntry:
    w: int
    value: object        # Fraction, or "vacuous"
    exact: bool
    samples: int = 0


@dataclass
class SoundnessProfile:
    side: str
    entries: dict

    def values(self):
        return {w: e.value for w, e in self.entries.items()}

    def min_value(self):
        vals = [e.value for e in self.entries.values() if e.value != "vacuous"]
        return min(vals) if vals else None

    def to_json(self):
        return {"side": self.side,
                "entries": [{"w": e.w, "epsilon": str(e.value),
                             "epsilon_float": None if e.value == "vacuous" else float(e.value),
                             "exact": e.exact, "samples": e.samples}
                            for e in self.entries.values()]}


def _check_matrix(code, side):
    """Syndrome map H for the side: v -> H v."""
    return code.bd1 if side == "Z" else code.bd2.T.tocsr()


def _fullspace_profile(code, side, w_max, budget):
    N = code.N
    if 2 ** N > budget:
        raise BudgetExceeded("full-space soundness scan", budget, 2 ** N)
    H = sp.csc_matrix(_check_matrix(code, side))
    R = H.shape[0]
    cols = sparse_cols_as_ints(H)
    W = _words(R)
    syn = _span_table(cols, W)                  # index i <-> qudit bitmask i
    wt_v = np.bitwise_count(np.arange(2 ** N, dtype=np.uint64)).astype(np.int64)
    wt_s = _popcount_rows(syn)
    if W == 1:
        key = syn[:, 0]
        uniq, inv = np.unique(key, return_inverse=True)
    else:
        uniq, inv = np.unique(syn, axis=0, return_inverse=True)
    inv = inv.ravel()
    minw = np.full(len(uniq), N + 1, dtype=np.int64)
    np.minimum.at(minw, inv, wt_v)
    coset_min = minw[inv]
    entries = {}
    for w in range(1, w_max + 1):
        mask = (wt_v == w) & (wt_s > 0)
        entries[w] = _min_ratio(w, wt_s[mask], coset_min[mask], True, 0)
    return entries


def _min_ratio(w, num, den, exact, samples):
    if len(num) == 0:
        return SoundnessEntry(w, "vacuous", exact, samples)
    pairs = set(zip(num.tolist(), den.tolist()))
    return SoundnessEntry(w, min(Fraction(a, b) for a, b in pairs), exact, samples)


def _coset_min(vs, sd, W):
    """Exact min over kernel vectors u of wt(v + u), for each packed v."""
    k = len(sd.kernel)
    table = _span_table(sd.kernel, W)
    out = np.empty(len(vs), dtype=np.int64)
    for i, v in enumerate(vs):
        out[i] = _popcount_rows(table ^ v).min()
    return out


def _perweight_profile(code, side, w_max, budget, mode, samples, seed):
    sd = side_data(code, side)
    N = code.N
    k = len(sd.kernel)
    W = _words(N)
    H = sp.csc_matrix(_check_matrix(code, side))
    cols = sparse_cols_as_ints(H)
    rng = rng_stream(seed, 0)
    entries = {}
    for w in range(1, w_max + 1):
        total = math.comb(N, w)
        if mode == "exhaustive":
            if total * 2 ** k > budget:
                raise BudgetExceeded(f"soundness scan at w={w}", budget, total * 2 ** k)
            supports = combinations(range(N), w)
            count = total
        else:
            if samples * 2 ** k > budget:
                raise BudgetExceeded(f"sampled soundness at w={w}", budget, samples * 2 ** k)
            supports = (tuple(rng.choice(N, size=w, replace=False).tolist()) for _ in range(samples))
            count = samples
        nums, vs = [], []
        for S in supports:
            s = 0
            x = 0
            for j in S:
                s ^= cols[j]
                x |= 1 << j
            if s:
                nums.append(s.bit_count())
                vs.append(_to_words(x, W))
        if vs:
            dens = _coset_min(vs, sd, W)
            entries[w] = _min_ratio(w, np.array(nums), dens, mode == "exhaustive", count)
        else:
            entries[w] = SoundnessEntry(w, "vacuous", mode == "exhaustive", count)
    return entries


def soundness_profile(code, w_max, mode="exhaustive", side="Z", samples=1000, seed=0,
                      budget=DISTANCE_BUDGET):
    """epsilon(w) = min over weight-w v with nonzero syndrome of wt(Hv) / min_u wt(v+u).

    Exhaustive entries are exact; sampled entries are upper bounds.
    """
    if code.d != 2:
        raise ValueError("soundness is implemented over F_2 only")
    w_max = min(w_max, code.N)
    if mode == "exhaustive" and 2 ** code.N <= budget:
        entries = _fullspace_profile(code, side, w_max, budget)
    elif mode in ("exhaustive", "sampled"):
        entries = _perweight_profile(code, side, w_max, budget, mode, samples, seed)
    else:
        raise ValueError("mode must be 'exhaustive' or 'sampled'")
    return SoundnessProfile(side, entries)


# --- torus helpers -----------------------------------------------------------

def _torus(code):
    C = code.complex
    if C is None or C.kind != "torus":
        raise ValueError("needs a code built from a torus")
    return C


def _orbit(C, S, dirs, base):
    red = C.reducer
    start = red.reduce(base)
    seen = {start}
    dq = deque([start])
    while dq:
        x = dq.popleft()
        for i in dirs:
            for step in (1, -1):
                y = list(x)
                y[i] += step
                y = red.reduce(y)
                if y not in seen:
                    seen.add(y)
                    dq.append(y)
    return sorted(seen)


def plane_logical(code, S, base=None):
    """Indicator of the q-cells (S, x) with x on the plane base + span{e_i : i in S}."""
    C = _torus(code)
    n = C.meta["n"]
    S = tuple(sorted(S))
    if len(S) != code.q or any(not 0 <= i < n for i in S) or len(set(S)) != len(S):
        raise ValueError(f"S must be {code.q} distinct directions in 0..{n - 1}")
    base = [0] * n if base is None else list(base)
    v = np.zeros(code.N, dtype=np.int64)
    for x in _orbit(C, S, S, base):
        v[C.index[code.q][(S, x)]] = 1
    return v


def dual_plane_cochain(code, S, base=None):
    """Cocycle on q-cells (S, x) with x on base + span{e_j : j not in S}."""
    C = _torus(code)
    n = C.meta["n"]
    S = tuple(sorted(S))
    base = [0] * n if base is None else list(base)
    comp = [j for j in range(n) if j not in S]
    v = np.zeros(code.N, dtype=np.int64)
    for x in _orbit(C, S, comp, base):
        v[C.index[code.q][(S, x)]] = 1
    return v


def pairing(u, v):
    return int(np.dot(np.asarray(u) % 2, np.asarray(v) % 2) % 2)


def class_minimum_weight(code, h, max_steps=10_000):
    """Fewest edges of an integer 1-cycle on a torus code in lattice class h.

    BFS on the universal cover: walk from 0 along +-e_i until reaching h.
    """
    C = _torus(code)
    n = C.meta["n"]
    h = tuple(int(t) for t in h)
    if not any(h):
        return 0
    L = C.meta["lattice"]
    from .lattice import Lattice
    if not Lattice(L).contains(h):
        raise ValueError("h is not a lattice vector")
    start = (0,) * n
    dist = {start: 0}
    dq = deque([start])
    while dq:
        x = dq.popleft()
        if dist[x] >= max_steps:
            break
        for i in range(n):
            for s in (1, -1):
                y = x[:i] + (x[i] + s,) + x[i + 1:]
                if y not in dist:
                    dist[y] = dist[x] + 1
                    if y == h:
                        return dist[y]
                    dq.append(y)
    raise BudgetExceeded("class BFS", max_steps)


def torus_calibration_bound(code, X):
    """Calibration lower bound |X| for the class X of a torus code."""
    from .exterior import calibration_bound
    _torus(code)
    if X.m != code.q:
        raise ValueError("class degree must equal q")
    return calibration_bound(X)


# --- contractions -------------------------------------------------------------

def simplex_contraction(C, v, q):
    """x = (boundary of v) cup {1}: same boundary as v, weight <= wt(boundary v)."""
    if C.kind != "simplex":
        raise ValueError("simplex contraction needs a simplex-sphere complex")
    bv = C.apply(q, v)
    if q == 0:
        return np.zeros_like(np.asarray(v))
    return cup_with_set(C, bv, (1,), q - 1)


@dataclass
class SweepCertificate:
    v_f: np.ndarray
    filling_weight: int      # wt(v + v_f)
    boundary_weight: int     # wt(boundary v)
    steps: int
    max_intermediate: int    # largest boundary weight seen during the run
    face_rounds: int         # clearing rounds spent on top faces
    p_n: int = 1
    c0: int = 6

    @property
    def ratio(self):
        """Measured wt(v + v_f) / (p n wt(boundary v))."""
        if self.boundary_weight == 0:
            return None
        return self.filling_weight / (self.p_n * self.boundary_weight)

    @property
    def growth(self):
        """max_intermediate / wt(boundary v)."""
        return None if self.boundary_weight == 0 else self.max_intermediate / self.boundary_weight


def _product_faces(cell):
    a, b = cell
    return [(f, b) for f, _ in _cube_faces(a)] + [(a, f) for f, _ in _cube_faces(b)]


def sphere_product_contraction(code, v, max_rounds=None):
    """Fill the boundary of v on S^n x S^n by coordinate sweeps.

    The boundary chain b is pushed layer by layer: a push replaces the layer at
    height x along an axis by its prism to the neighbouring height.  Per factor:

    1. clear the open top face {axis 0 = p}: push the rim of the top face down
       one step, then sweep the top face along axis j (cycling through 1..n and
       both directions) until no cell of b is interior to the top face;
    2. sweep axis 0 from p down to 1 over the whole sphere;
    3. sweep axes 1..n inside the bottom face.

    Stages 2 and 3 are global sweeps and never increase wt(b); this is asserted.
    Stage 1 can increase wt(b) and the peak is reported.  The prisms form x with
    boundary(x) = boundary(v), and v_f = v + x is a cycle.
    """
    C = code.complex
    if C is None or C.kind != "sphere_product":
        raise ValueError("needs a hypersphere-product code")
    n, p, q = C.meta["n"], C.meta["p"], code.q
    if q < 1:
        raise ValueError("needs q >= 1")
    if max_rounds is None:
        max_rounds = 4 * n + 4
    top = 2 * p
    v = np.asarray(v) % 2
    b = set(C.support(q - 1, C.apply(q, v)))
    w0 = len(b)
    x = set()
    steps = 0
    max_w = w0
    rounds = 0
    valid_q = C.index[q]

    def push(f, axis, level, restrict, up=False, cap=None):
        nonlocal steps, max_w
        layer = [c for c in b if c[f][axis] == 2 * level and restrict(c)]
        steps += 1
        for c in layer:
            part = list(c[f])
            part[axis] += 1 if up else -1
            pr = (tuple(part), c[1]) if f == 0 else (c[0], tuple(part))
            if pr not in valid_q:
                raise AssertionError(f"sweep produced an invalid cell {pr}")
            x.symmetric_difference_update([pr])
            b.symmetric_difference_update(_product_faces(pr))
        max_w = max(max_w, len(b))
        if cap is not None and len(b) > cap:
            raise AssertionError(f"boundary weight grew from {cap} to {len(b)} in a global sweep")

    for f in (0, 1):
        def interior(c, f=f):
            a = c[f]
            return a[0] == top and all(t not in (0, top) for t in a[1:])

        def rim(c, f=f):
            return c[f][0] == top and not interior(c)

        def on_top(c, f=f):
            return c[f][0] == top

        for r in range(max_rounds + 1):
            if not any(interior(c) for c in b):
                break
            if r == max_rounds:
                raise RuntimeError(f"top face not cleared after {max_rounds} rounds")
            rounds += 1
            push(f, 0, p, rim)
            j = 1 + r % n
            if (r // n) % 2 == 0:
                for level in range(p, 0, -1):
                    push(f, j, level, on_top)
            else:
                for level in range(p):
                    push(f, j, level, on_top, up=True)
        cap = len(b)
        for level in range(p, 0, -1):
            push(f, 0, level, lambda c: True, cap=cap)
        for axis in range(1, n + 1):
            for level in range(p, 0, -1):
                push(f, axis, level, lambda c, f=f: c[f][0] == 0, cap=cap)
    if b:
        raise AssertionError(f"sweep left {len(b)} boundary cells")
    xv = C.chain(q, x) if x else np.zeros(code.N, dtype=np.int64)
    assert np.array_equal(C.apply(q, xv) % 2, C.apply(q, v) % 2)
    v_f = (v + xv) % 2
    cert = SweepCertificate(v_f, int(xv.sum()), w0, steps, max_w, rounds, p * n)
    if cert.filling_weight > cert.c0 * p * n * w0:
        raise AssertionError(f"filling weight {cert.filling_weight} exceeds "
                             f"{cert.c0} p n wt(boundary) = {cert.c0 * p * n * w0}")
    return cert
