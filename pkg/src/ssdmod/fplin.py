"""Dense linear algebra over F_p on numpy int64 arrays.

Used to flatten sigma-semilinear equations over W-ring residues into
plain F_p systems (Lang base step, Artin-Schreier corrections,
fixed-point solves).  Sizes stay in the hundreds, so a single rref
factorization per operator plus O(n^2) per right-hand side is plenty.
"""

import numpy as np


def rref(a, p):
    """Row-reduce a copy of a mod p; returns (R, pivots, transform)."""
    R = np.array(a, dtype=np.int64) % p
    n, m = R.shape
    T = np.eye(n, dtype=np.int64)
    pivots = []
    row = 0
    for col in range(m):
        if row >= n:
            break
        hits = np.nonzero(R[row:, col])[0]
        if hits.size == 0:
            continue
        i = row + int(hits[0])
        if i != row:
            R[[row, i]] = R[[i, row]]
            T[[row, i]] = T[[i, row]]
        inv = pow(int(R[row, col]), -1, p)
        R[row] = (R[row] * inv) % p
        T[row] = (T[row] * inv) % p
        others = np.nonzero(R[:, col])[0]
        others = others[others != row]
        if others.size:
            f = R[others, col][:, None]
            R[others] = (R[others] - f * R[row][None, :]) % p
            T[others] = (T[others] - f * T[row][None, :]) % p
        pivots.append(col)
        row += 1
    return R, pivots, T


class LinearSolver:
    """Factor A once over F_p; solve A x = b repeatedly, plus nullspace."""

    def __init__(self, a, p):
        self.p = p
        self.shape = a.shape
        self.R, self.pivots, self.T = rref(a, p)
        self.rank = len(self.pivots)

    def solve(self, b):
        """Particular solution with free variables 0, or None."""
        p = self.p
        u = (self.T @ (np.asarray(b, dtype=np.int64) % p)) % p
        if (u[self.rank:] % p).any():
            return None
        x = np.zeros(self.shape[1], dtype=np.int64)
        for i, col in enumerate(self.pivots):
            x[col] = u[i]
        return x

    def nullspace(self):
        p = self.p
        m = self.shape[1]
        free = [c for c in range(m) if c not in self.pivots]
        basis = []
        for fc in free:
            v = np.zeros(m, dtype=np.int64)
            v[fc] = 1
            for i, pc in enumerate(self.pivots):
                v[pc] = (-int(self.R[i, fc])) % p
            basis.append(v)
        return basis


def rank(a, p):
    _, pivots, _ = rref(a, p)
    return len(pivots)
