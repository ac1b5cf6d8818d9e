"""Full-rank lattices over W_s(F_{p^r}) with scaling exponents.

A Lattice is p^scale times the column span of an integral basis matrix,
kept in a canonical form: lower triangular, diagonal entries p^(e_i),
entries left of the diagonal reduced modulo their row's pivot, and the
largest common p-power factored out into the scale.  Canonical forms of
equal lattices are identical arrays, so equality is syntactic.

Canonicalization certifies that the span contains p^(eff-1) times the
ambient standard lattice; by a Nakayama argument this guarantees the
computed form is the exact canonical form of the underlying
W(k)-lattice, not an artifact of truncation.  When the certificate
fails, the operation raises PrecisionExhausted instead of guessing.
"""

import numpy as np

from .errors import BadParameter, DescriptorMismatch, NotContained, \
    PrecisionExhausted
from .matrices import WittMatrix, smith_normal_form


def _outer_update(ring, W, cols_idx, col, quots):
    """W[:, cols_idx] -= col (x) quots, an outer ring-product update."""
    r = ring.r
    if r == 1:
        W[:, cols_idx, 0] = (W[:, cols_idx, 0]
                             - np.outer(col[:, 0], quots[:, 0])) % ring.pn
        return
    conv = np.zeros((col.shape[0], quots.shape[0], 2 * r - 1),
                    dtype=ring.dtype)
    for a in range(r):
        for b in range(r):
            conv[:, :, a + b] += np.outer(col[:, a], quots[:, b])
    prod = conv[..., :r] + conv[..., r:] @ ring._redmat
    W[:, cols_idx] = (W[:, cols_idx] - prod) % ring.pn


def _canonical_basis(ring, cols, eff):
    """Canonical triangular basis of the span of cols (n x K x r)."""
    n = cols.shape[0]
    W = cols % ring.pn
    if eff < ring.s:
        # make the truncation indeterminacy explicit
        extra = ring.zeros((n, n))
        for i in range(n):
            extra[i, i, 0] = ring.p ** eff
        W = np.concatenate([W, extra], axis=1)
    K = W.shape[1]
    if K < n:
        raise PrecisionExhausted("fewer generators than ambient rank")
    for i in range(n):
        vals = ring.arr_val(W[i, i:])
        minval = int(vals.min()) if vals.size else ring.s
        if minval >= eff:
            raise PrecisionExhausted(
                f"no pivot below precision {eff} in row {i}",
                suggested_precision=ring.s + 4)
        j = i + int(np.nonzero(vals == minval)[0][0])  # leftmost
        if j != i:
            W[:, [i, j]] = W[:, [j, i]]
        pe = ring.p ** minval
        unit = tuple(int(c) // pe for c in W[i, i])
        unit_inv = np.array(ring.rep_inverse(unit), dtype=ring.dtype)
        W[:, i] = ring.arr_scalar_mul(unit_inv, W[:, i])
        rest = np.arange(i + 1, K)
        live = rest[np.asarray(W[i, rest].any(axis=-1), dtype=bool)]
        if live.size:
            quots = W[i, live] // pe
            _outer_update(ring, W, live, W[:, i], quots)
    B = W[:, :n].copy()
    diag_exps = [int(ring.arr_val(B[i, i])) for i in range(n)]
    # reduce entries left of each pivot modulo the pivot
    for i in range(1, n):
        pe = ring.p ** diag_exps[i]
        left = np.arange(i)
        quots = B[i, left] // pe
        if quots.any():
            _outer_update(ring, B, left, B[:, i], quots)
    return B, diag_exps


def _solve_triangular(ring, B, diag_exps, V, eff):
    """Coefficients C with B @ C = V for canonical triangular B.

    Returns (C, ok); ok is False when some division fails at a definite
    valuation, and PrecisionExhausted is raised when failure cannot be
    distinguished from truncation noise.
    """
    n = B.shape[0]
    m = V.shape[1]
    C = ring.zeros((n, m))
    rem = V % ring.pn
    for i in range(n):
        e = diag_exps[i]
        row = rem[i]
        if e:
            vals = ring.arr_val(row)
            if (vals < e).any():
                if int(vals.min()) >= eff:
                    raise PrecisionExhausted(
                        "membership undecidable at eff_prec")
                return C, False
        ci = row // (ring.p ** e)
        C[i] = ci
        idx = np.nonzero(np.asarray(ci.any(axis=-1), dtype=bool))[0]
        if idx.size:
            _outer_update(ring, rem, idx, B[:, i], ci[idx])
    return C, True


class Lattice:
    __slots__ = ("ring", "n", "basis", "scale", "eff", "diag_exps",
                 "_snf_exps")

    def __init__(self, ring, basis, scale, eff, diag_exps):
        self.ring = ring
        self.n = basis.shape[0]
        self.basis = basis
        self.scale = scale
        self.eff = eff
        self.diag_exps = tuple(diag_exps)
        self._snf_exps = None

    # ----------------------------------------------------------- builders

    @classmethod
    def from_columns(cls, ring, cols, scale=0, eff=None):
        """cols: ndarray (n, K, r) of integral generators."""
        eff = ring.s if eff is None else min(eff, ring.s)
        B, diag_exps = _canonical_basis(ring, cols, eff)
        n = B.shape[0]
        if max(diag_exps, default=0) > 0:
            # certificate: p^(eff-1) * standard lattice inside the span
            target = ring.zeros((n, n))
            for i in range(n):
                target[i, i, 0] = ring.p ** (eff - 1)
            _, ok = _solve_triangular(ring, B, diag_exps, target, eff)
            if not ok:
                raise PrecisionExhausted(
                    "an elementary divisor sits at or beyond eff_prec",
                    suggested_precision=ring.s + 4)
        t = int(ring.arr_val(B).min()) if n else 0
        if t > 0:
            B = B // (ring.p ** t)
            scale += t
            diag_exps = [e - t for e in diag_exps]
        return cls(ring, B, scale, eff, diag_exps)

    @classmethod
    def from_matrix(cls, mat, scale=0):
        return cls.from_columns(mat.ring, mat.data, scale, mat.eff)

    @classmethod
    def standard(cls, ring, n, eff=None):
        eff = ring.s if eff is None else eff
        d = ring.zeros((n, n))
        for i in range(n):
            d[i, i, 0] = 1
        return cls(ring, d, 0, eff, [0] * n)

    def basis_matrix(self):
        return WittMatrix(self.ring, self.basis.copy(), self.eff)

    # --------------------------------------------------------- invariants

    def snf_exponents(self):
        """Elementary-divisor exponents of the integral basis (ascending)."""
        if self._snf_exps is None:
            sf = smith_normal_form(self.basis_matrix())
            if any(sf.saturated):
                raise PrecisionExhausted("lattice SNF saturated")
            self._snf_exps = sf.exponents
        return self._snf_exps

    def max_exponent(self):
        """Largest elementary divisor exponent of the integral basis."""
        return max(self.snf_exponents())

    def normalized_key(self):
        """Scale-free fingerprint of the canonical basis (cycle detection)."""
        if self.basis.dtype == object:
            return tuple(int(x) for x in self.basis.reshape(-1))
        return self.basis.tobytes()

    # --------------------------------------------------------- operations

    def _aligned_pair(self, other):
        if other.ring is not self.ring:
            raise DescriptorMismatch("lattices over different rings")
        if other.n != self.n:
            raise BadParameter("lattices of different ambient rank")
        common = min(self.scale, other.scale)
        d1, d2 = self.scale - common, other.scale - common
        if d1 >= self.eff or d2 >= other.eff:
            raise PrecisionExhausted("scale gap exceeds eff_prec")
        B1 = (self.basis * self.ring.p ** d1) % self.ring.pn
        B2 = (other.basis * self.ring.p ** d2) % self.ring.pn
        exps1 = [e + d1 for e in self.diag_exps]
        return B1, B2, exps1, common, min(self.eff, other.eff)

    def __add__(self, other):
        B1, B2, _, common, eff = self._aligned_pair(other)
        return Lattice.from_columns(self.ring,
                                    np.concatenate([B1, B2], axis=1),
                                    common, eff)

    def intersect(self, other):
        B1, B2, _, common, eff = self._aligned_pair(other)
        ring = self.ring
        stacked = np.concatenate([B1, (-B2) % ring.pn], axis=1)
        sf = smith_normal_form(WittMatrix(ring, stacked, eff))
        if any(sf.saturated):
            raise PrecisionExhausted("intersection kernel saturated")
        n = self.n
        u_part = sf.right.data[:n, n:]
        gens = ring.arr_matmul(B1, u_part)
        return Lattice.from_columns(ring, gens, common, eff)

    def contains(self, other):
        """Is other a sublattice of self?"""
        B1, B2, exps1, _, eff = self._aligned_pair(other)
        _, ok = _solve_triangular(self.ring, B1, exps1, B2, eff)
        return ok

    def member(self, vec):
        """Is the coordinate vector (shape (n, r), integral) in the lattice?"""
        ring = self.ring
        V = np.asarray(vec, dtype=ring.dtype).reshape(self.n, 1, ring.r)
        if self.scale >= 0:
            B = (self.basis * ring.p ** self.scale) % ring.pn
            exps = [e + self.scale for e in self.diag_exps]
        else:
            d = -self.scale
            if d >= self.eff:
                raise PrecisionExhausted("scale gap exceeds eff_prec")
            B = self.basis
            exps = self.diag_exps
            V = (V * ring.p ** d) % ring.pn
        _, ok = _solve_triangular(ring, B, exps, V % ring.pn, self.eff)
        return ok

    def equals(self, other):
        if other.ring is not self.ring or other.n != self.n:
            return False
        return (self.scale == other.scale
                and self.diag_exps == other.diag_exps
                and bool(np.array_equal(self.basis, other.basis)))

    def index_over(self, other):
        """Length of self / other; raises NotContained without containment."""
        B1, B2, exps1, _, eff = self._aligned_pair(other)
        C, ok = _solve_triangular(self.ring, B1, exps1, B2, eff)
        if not ok:
            raise NotContained("index requested without containment")
        sf = smith_normal_form(WittMatrix(self.ring, C, eff))
        if any(sf.saturated):
            raise PrecisionExhausted("index SNF saturated")
        return sum(sf.exponents)

    def apply_semilinear(self, op, twist=1, scale_shift=0):
        """Image lattice under v -> Op * sigma^twist(v), then times p^shift."""
        ring = self.ring
        new_cols = ring.arr_matmul(op.data, ring.arr_sigma(self.basis, twist))
        return Lattice.from_columns(ring, new_cols,
                                    self.scale + scale_shift,
                                    min(self.eff, op.eff))

    def scaled(self, k):
        """p^k * self."""
        return Lattice(self.ring, self.basis, self.scale + k, self.eff,
                       self.diag_exps)

    def __repr__(self):
        return (f"Lattice(rank {self.n}, scale {self.scale}, "
                f"exps {list(self.diag_exps)})")


def lattice_sum(l1, l2):
    return l1 + l2


def lattice_intersect(l1, l2):
    return l1.intersect(l2)


def lattice_compare(l1, l2, which):
    if which == "contains":
        return l1.contains(l2)
    if which == "equals":
        return l1.equals(l2)
    if which == "index":
        return l1.index_over(l2)
    raise BadParameter(f"unknown comparison {which!r}")
