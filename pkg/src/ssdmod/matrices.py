"""Matrix algebra over W_s(F_{p^r}).

Entries live in a numpy array of shape (rows, cols, r) holding the
polynomial coefficients of each entry's unramified-lift representative;
dtype is int64 while p^s is small and Python objects beyond.  W_s is a
chain ring, so Smith form pivots are powers of p and every elimination
quotient is integral once the pivot has minimal valuation.

eff_prec semantics: entries are exact representatives of W(k)-values
known modulo p^eff; any decision that would have to look at valuation
eff or beyond raises PrecisionExhausted.
"""

import numpy as np

from .errors import (BadParameter, DescriptorMismatch, NotUnimodular,
                     PrecisionExhausted)
from .witt import WittElement


class WittMatrix:
    __slots__ = ("ring", "data", "eff")

    def __init__(self, ring, data, eff=None):
        self.ring = ring
        self.data = data % ring.pn
        self.eff = ring.s if eff is None else min(eff, ring.s)
        if self.eff < 1:
            raise PrecisionExhausted("matrix with eff_prec < 1")

    # ----------------------------------------------------------- builders

    @classmethod
    def zeros(cls, ring, rows, cols, eff=None):
        return cls(ring, ring.zeros((rows, cols)), eff)

    @classmethod
    def identity(cls, ring, n, eff=None):
        d = ring.zeros((n, n))
        for i in range(n):
            d[i, i, 0] = 1
        return cls(ring, d, eff)

    @classmethod
    def from_entries(cls, ring, rows, eff=None):
        """rows: nested lists of WittElement or plain ints (constants)."""
        n = len(rows)
        m = len(rows[0]) if n else 0
        d = ring.zeros((n, m))
        for i, row in enumerate(rows):
            if len(row) != m:
                raise BadParameter("ragged matrix input")
            for j, v in enumerate(row):
                if isinstance(v, WittElement):
                    if v.ring is not ring:
                        raise DescriptorMismatch("entry from a wrong ring")
                    for t, c in enumerate(v.rep):
                        d[i, j, t] = c
                else:
                    d[i, j, 0] = int(v) % ring.pn
        return cls(ring, d, eff)

    # ------------------------------------------------------------- access

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    def get(self, i, j):
        return self.ring.element(tuple(int(c) for c in self.data[i, j]))

    def entries(self):
        for i in range(self.rows):
            for j in range(self.cols):
                yield i, j, self.get(i, j)

    def copy(self):
        return WittMatrix(self.ring, self.data.copy(), self.eff)

    def _check(self, other):
        if other.ring is not self.ring:
            raise DescriptorMismatch("matrices over different rings")

    # ---------------------------------------------------------- arithmetic

    def __add__(self, other):
        self._check(other)
        return WittMatrix(self.ring, self.ring.arr_add(self.data, other.data),
                          min(self.eff, other.eff))

    def __sub__(self, other):
        self._check(other)
        return WittMatrix(self.ring, self.ring.arr_sub(self.data, other.data),
                          min(self.eff, other.eff))

    def __neg__(self):
        return WittMatrix(self.ring, self.ring.arr_neg(self.data), self.eff)

    def __matmul__(self, other):
        self._check(other)
        if self.cols != other.rows:
            raise BadParameter("matmul shape mismatch")
        return WittMatrix(self.ring,
                          self.ring.arr_matmul(self.data, other.data),
                          min(self.eff, other.eff))

    def scalar_mul(self, c):
        if isinstance(c, WittElement):
            rep = np.array(c.rep, dtype=self.ring.dtype)
            return WittMatrix(self.ring,
                              self.ring.arr_scalar_mul(rep, self.data),
                              self.eff)
        return WittMatrix(self.ring, (self.data * (int(c) % self.ring.pn))
                          % self.ring.pn, self.eff)

    def p_pow_mul(self, k):
        """Multiply by p^k (k >= 0)."""
        return WittMatrix(self.ring,
                          (self.data * self.ring.p ** k) % self.ring.pn,
                          self.eff)

    def pdiv(self, k=1):
        """Exact division by p^k; requires every entry valuation >= k."""
        if k and int(self.ring.arr_val(self.data).min(initial=self.ring.s)) < k:
            raise BadParameter("matrix not divisible by p^k")
        return WittMatrix(self.ring, self.ring.arr_pdiv(self.data, k),
                          max(1, self.eff - k))

    def sigma(self, k=1):
        return WittMatrix(self.ring, self.ring.arr_sigma(self.data, k),
                          self.eff)

    def transpose(self):
        return WittMatrix(self.ring, self.data.transpose(1, 0, 2).copy(),
                          self.eff)

    def reduce(self, t):
        return WittMatrix(self.ring, self.ring.arr_reduce(self.data, t),
                          min(self.eff, t))

    def eq_mod(self, other, t):
        self._check(other)
        t = min(t, self.eff, other.eff)
        return bool(np.array_equal(self.ring.arr_reduce(self.data, t),
                                   self.ring.arr_reduce(other.data, t)))

    def __eq__(self, other):
        return (isinstance(other, WittMatrix) and other.ring is self.ring
                and np.array_equal(self.data, other.data))

    def __hash__(self):
        return hash((id(self.ring), self.data.tobytes()
                     if self.data.dtype != object else
                     tuple(self.data.reshape(-1))))

    def is_zero(self):
        return not self.data.any()

    def val_min(self):
        """Minimal valuation over all entries (s if the matrix is zero)."""
        if self.rows == 0 or self.cols == 0:
            return self.ring.s
        return int(self.ring.arr_val(self.data).min())

    def __repr__(self):
        return f"WittMatrix({self.rows}x{self.cols} over {self.ring})"

    # ------------------------------------------------------------ inverse

    def invert_unimodular(self):
        """Inverse of a matrix whose determinant is a unit (Gauss-Jordan)."""
        ring = self.ring
        n = self.rows
        if n != self.cols:
            raise BadParameter("inverse of a non-square matrix")
        W = self.data.copy()
        inv = self.identity(ring, n).data
        for k in range(n):
            vals = ring.arr_val(W[k:, k])
            unit_rows = np.nonzero(vals == 0)[0]
            if unit_rows.size == 0:
                raise NotUnimodular("no unit pivot in column %d" % k)
            i = k + int(unit_rows[0])
            if i != k:
                W[[k, i]] = W[[i, k]]
                inv[[k, i]] = inv[[i, k]]
            piv_inv = np.array(
                ring.rep_inverse(tuple(int(c) for c in W[k, k])),
                dtype=ring.dtype)
            W[k] = ring.arr_scalar_mul(piv_inv, W[k])
            inv[k] = ring.arr_scalar_mul(piv_inv, inv[k])
            for i in range(n):
                if i != k and W[i, k].any():
                    q = W[i, k].copy()
                    W[i] = ring.arr_sub(W[i], ring.arr_mul(q[None, :], W[k]))
                    inv[i] = ring.arr_sub(inv[i],
                                          ring.arr_mul(q[None, :], inv[k]))
        return WittMatrix(ring, inv, self.eff)


def kron(a, b):
    """Kronecker product over the ring (row-major block convention)."""
    a._check(b)
    ring = a.ring
    r = ring.r
    n1, m1 = a.rows, a.cols
    n2, m2 = b.rows, b.cols
    if r == 1:
        out = np.kron(a.data[:, :, 0], b.data[:, :, 0])[..., None] % ring.pn
        return WittMatrix(ring, out, min(a.eff, b.eff))
    conv = np.zeros((n1 * n2, m1 * m2, 2 * r - 1), dtype=ring.dtype)
    for i in range(r):
        for j in range(r):
            conv[:, :, i + j] += np.kron(a.data[:, :, i], b.data[:, :, j])
    out = conv[..., :r] + conv[..., r:] @ ring._redmat
    return WittMatrix(ring, out % ring.pn, min(a.eff, b.eff))


class SmithForm:
    """left @ A @ right = diag(p^e_1, ..., p^e_k) at eff_prec.

    exponents are nondecreasing; an exponent equal to eff with its
    saturated flag set means ">= eff" (the pivot was indistinguishable
    from zero at the working precision).
    """

    __slots__ = ("exponents", "saturated", "left", "right", "eff")

    def __init__(self, exponents, saturated, left, right, eff):
        self.exponents = tuple(exponents)
        self.saturated = tuple(saturated)
        self.left = left
        self.right = right
        self.eff = eff

    @property
    def is_unimodular(self):
        return all(e == 0 for e in self.exponents) and not any(self.saturated)

    def val_det(self):
        """Valuation of the determinant (square case, unsaturated)."""
        if any(self.saturated):
            raise PrecisionExhausted("determinant valuation saturated")
        return sum(self.exponents)


def smith_normal_form(mat):
    """Smith form over the chain ring W_s with unimodular transforms."""
    ring = mat.ring
    n, m = mat.rows, mat.cols
    W = mat.data.copy()
    L = WittMatrix.identity(ring, n).data
    R = WittMatrix.identity(ring, m).data
    eff = mat.eff
    exps, sat = [], []
    k = 0
    while k < min(n, m):
        sub = W[k:, k:]
        vals = ring.arr_val(sub)
        minval = int(vals.min())
        if minval >= eff:
            for _ in range(k, min(n, m)):
                exps.append(eff)
                sat.append(True)
            break
        pos = np.argwhere(vals == minval)[0]  # topmost, then leftmost
        i, j = k + int(pos[0]), k + int(pos[1])
        if i != k:
            W[[k, i]] = W[[i, k]]
            L[[k, i]] = L[[i, k]]
        if j != k:
            W[:, [k, j]] = W[:, [j, k]]
            R[:, [k, j]] = R[:, [j, k]]
        e = minval
        pe = ring.p ** e
        unit = tuple(int(c) // pe for c in W[k, k])
        unit_inv = np.array(ring.rep_inverse(unit), dtype=ring.dtype)
        W[k] = ring.arr_scalar_mul(unit_inv, W[k])
        L[k] = ring.arr_scalar_mul(unit_inv, L[k])
        # clear column k below, then row k to the right
        for i in range(k + 1, n):
            if W[i, k].any():
                q = W[i, k] // pe
                W[i] = ring.arr_sub(W[i], ring.arr_mul(q[None, :], W[k]))
                L[i] = ring.arr_sub(L[i], ring.arr_mul(q[None, :], L[k]))
        for j in range(k + 1, m):
            if W[k, j].any():
                q = W[k, j] // pe
                W[:, j] = ring.arr_sub(W[:, j],
                                       ring.arr_mul(q[None, :], W[:, k]))
                R[:, j] = ring.arr_sub(R[:, j],
                                       ring.arr_mul(q[None, :], R[:, k]))
        exps.append(e)
        sat.append(False)
        k += 1
    return SmithForm(exps, sat, WittMatrix(ring, L, eff),
                     WittMatrix(ring, R, eff), eff)


def matrix_ops(a, b, which):
    """Dispatch: mul / add / sigma-apply / invert-unimodular."""
    if which == "mul":
        return a @ b
    if which == "add":
        return a + b
    if which == "sigma-apply":
        return a.sigma(1)
    if which == "invert-unimodular":
        return a.invert_unimodular()
    raise BadParameter(f"unknown matrix op {which!r}")
