"""
LDA lattices: integer vectors whose reduction mod p lies in a linear code.

With G in systematic form [I; C] (after a row permutation) the lattice is
generated by the columns of B0 = [[I, 0], [C, pI]] in the permuted
coordinates, so vol = p^(n-k).
"""

from dataclasses import dataclass

import numpy as np

from .fpla import FpMatrix, in_column_span, is_nondegenerate, systematic_form
from .lattice import Lattice


@dataclass(frozen=True)
class LdaLattice:
    n: int
    k: int
    p: int
    G: FpMatrix      # the code generator as given
    perm: tuple      # perm[i] = original coordinate placed at row i of B0
    C: FpMatrix      # (n-k)-by-k systematic block
    B0: np.ndarray   # n-by-n integer generating matrix, permuted coordinates
    lattice: Lattice # lattice in the original coordinates

    def contains(self, x):
        """Fast path: x mod p is a codeword iff the check rows vanish."""
        x = np.asarray(x, dtype=np.int64)
        if x.shape != (self.n,):
            raise ValueError(f"expected a length-{self.n} vector")
        xp = np.mod(x[list(self.perm)], self.p)
        top, bottom = xp[:self.k], xp[self.k:]
        return bool(np.all(np.mod(self.C.array @ top - bottom, self.p) == 0))

    def contains_by_solve(self, x):
        """Oracle: solve B0 y = x over the integers (triangular back-substitution)."""
        x = [int(t) for t in x]
        xp = [x[i] for i in self.perm]
        y_top = xp[:self.k]
        C = self.C.array
        for i in range(self.n - self.k):
            rest = xp[self.k + i] - sum(int(C[i, j]) * y_top[j] for j in range(self.k))
            if rest % self.p:
                return False
        return True

    def contains_mod_code(self, x):
        """Oracle: direct column-span test of x mod p against G."""
        return in_column_span(self.G, x)

    def volume_sq(self):
        return self.lattice.volume_sq()


def build_lda(G):
    n, k = G.shape
    p = G.p
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got n={n}, k={k}")
    if not is_nondegenerate(G):
        raise ValueError("code generator matrix is degenerate")
    perm, C = systematic_form(G)
    B0 = np.zeros((n, n), dtype=np.int64)
    B0[:k, :k] = np.eye(k, dtype=np.int64)
    B0[k:, :k] = C.array
    B0[k:, k:] = p * np.eye(n - k, dtype=np.int64)
    # undo the row permutation to express the basis in original coordinates
    orig = np.zeros_like(B0)
    orig[perm, :] = B0
    lat = Lattice([[int(v) for v in orig[:, j]] for j in range(n)])
    return LdaLattice(n, k, p, G, tuple(perm), C, B0, lat)
