"""Truncated Witt rings W_s(F_{p^r}) with exact arithmetic.

Internally an element is stored through the classical identification of
W_s(F_q) with the length-s truncation of the unramified extension Z_q:
a polynomial of degree < r with coefficients in Z/p^s, reduced modulo a
monic lift of the field modulus.  Witt coordinates are recovered from
the Teichmuller digit expansion u = sum_i p^i [b_i] via a_i = b_i^(p^i),
and rebuilt from coordinates by the inverse map.  Addition and
multiplication are then plain ring operations on the lift, which keeps
s in the tens feasible; the universal Witt sum/product polynomials (see
wittpoly) survive as an independent small-s oracle.

The Frobenius sigma acts coordinatewise on Witt coordinates; on the
lift it is the Z/p^s-linear map sending the generator to the Hensel
root of the modulus lying above x^p, precomputed as a matrix.
"""

from functools import lru_cache

import numpy as np

from .errors import (BadParameter, DescriptorMismatch, DivisionByZero,
                     NotDivisible)
from .fields import FieldElement, get_field

# int64 is safe while n * (p^s - 1)^2 stays below 2^63 for every
# contraction length n we use (<= a few thousand); 2^25 leaves headroom.
_INT64_LIMIT = 1 << 25


@lru_cache(maxsize=None)
def get_witt_ring(p, r, s):
    return WittRing(get_field(p, r), s)


class WittRing:
    """Descriptor for W_s(F_{p^r}); use get_witt_ring for the cached copy."""

    def __init__(self, field, s):
        if s < 1:
            raise BadParameter(f"truncation length s = {s} must be >= 1")
        self.field = field
        self.p = field.p
        self.r = field.r
        self.s = s
        self.pn = field.p ** s
        self.dtype = np.int64 if self.pn <= _INT64_LIMIT else object
        # monic lift of the modulus with coefficients in {0..p-1}
        self.phihat = tuple(int(c) for c in field.modulus)
        self._redmat = self._reduction_matrix()
        self._sigma_mat = None  # built lazily (needs digit machinery)

    def __repr__(self):
        return f"W_{self.s}(F_{{{self.p}^{self.r}}})"

    # ---------------------------------------------------------- raw arrays
    #
    # A "rep" is an ndarray whose last axis has length r and holds the
    # polynomial coefficients in [0, p^s).  All array helpers broadcast
    # over leading axes so matrices are arrays of shape (rows, cols, r).

    def _reduction_matrix(self):
        """rows k: coefficients of x^(r+k) reduced mod the lifted modulus."""
        r, pn = self.r, self.pn
        if r == 1:
            return np.zeros((0, 1), dtype=self.dtype)
        rows = []
        # x^r = -(c_0 + ... + c_{r-1} x^{r-1})
        cur = [(-c) % pn for c in self.phihat[:r]]
        rows.append(list(cur))
        for _ in range(r - 2):
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                cur = [(a + top * b) % pn for a, b in zip(cur, rows[0])]
            rows.append(list(cur))
        mat = np.zeros((r - 1, r), dtype=self.dtype)
        for k in range(r - 1):
            for j in range(r):
                mat[k, j] = rows[k][j]
        return mat

    def arr(self, data):
        a = np.asarray(data, dtype=self.dtype)
        if a.shape[-1] != self.r:
            raise BadParameter("last axis must hold r coefficients")
        return a % self.pn

    def zeros(self, shape):
        return np.zeros(tuple(shape) + (self.r,), dtype=self.dtype)

    def arr_add(self, a, b):
        return (a + b) % self.pn

    def arr_sub(self, a, b):
        return (a - b) % self.pn

    def arr_neg(self, a):
        return (-a) % self.pn

    def arr_mul(self, a, b):
        """Elementwise ring product; a, b broadcastable up to the last axis."""
        r = self.r
        if r == 1:
            return (a * b) % self.pn
        a, b = np.broadcast_arrays(a, b)
        conv = np.zeros(a.shape[:-1] + (2 * r - 1,), dtype=self.dtype)
        for i in range(r):
            conv[..., i:i + r] += a[..., i:i + 1] * b
        out = conv[..., :r] + conv[..., r:] @ self._redmat
        return out % self.pn

    def arr_matmul(self, a, b):
        """(n,k,r) @ (k,m,r) -> (n,m,r) over the ring."""
        r = self.r
        if r == 1:
            return (a[..., 0] @ b[..., 0])[..., None] % self.pn
        n, k = a.shape[0], a.shape[1]
        m = b.shape[1]
        conv = np.zeros((n, m, 2 * r - 1), dtype=self.dtype)
        for i in range(r):
            for j in range(r):
                conv[:, :, i + j] += a[:, :, i] @ b[:, :, j]
        out = conv[..., :r] + conv[..., r:] @ self._redmat
        return out % self.pn

    def arr_matvec(self, a, v):
        return self.arr_matmul(a, v[:, None, :])[:, 0, :]

    def arr_scalar_mul(self, c, a):
        """Scalar rep c (shape (r,)) times array a."""
        r = self.r
        if r == 1:
            return (a * c[0]) % self.pn
        conv = np.zeros(a.shape[:-1] + (2 * r - 1,), dtype=self.dtype)
        for i in range(r):
            if c[i]:
                conv[..., i:i + r] += a * c[i]
        out = conv[..., :r] + conv[..., r:] @ self._redmat
        return out % self.pn

    def arr_val(self, a):
        """p-adic valuation per entry: min over coefficients, capped at s."""
        flat = a.reshape(-1, self.r)
        out = np.full(flat.shape[0], self.s, dtype=np.int64)
        rem = flat.copy()
        for v in range(self.s):
            nonzero = (rem % self.p != 0).any(axis=1)
            fresh = nonzero & (out == self.s)
            out[fresh] = v
            rem = rem // self.p
        return out.reshape(a.shape[:-1])

    def arr_pdiv(self, a, k=1):
        """Exact division by p^k (caller guarantees valuations >= k)."""
        return a // (self.p ** k)

    def arr_reduce(self, a, t):
        """Representative mod p^t (coefficients reduced into [0, p^t))."""
        return a % (self.p ** min(t, self.s))

    def arr_residue(self, a):
        """F_p coefficient array (last axis length r) of a mod p."""
        return (a % self.p).astype(np.int64)

    def arr_sigma(self, a, k=1):
        """sigma^k applied entrywise (k may be negative)."""
        if self.r == 1:
            return a.copy()
        k %= self.r
        if k == 0:
            return a.copy()
        mat = self.sigma_matrix(k)
        return (a @ mat.T) % self.pn

    @property
    def _sigma1(self):
        if self._sigma_mat is None:
            self._sigma_mat = self._build_sigma()
        return self._sigma_mat

    def sigma_matrix(self, k=1):
        k %= self.r
        if not hasattr(self, "_sigma_pows"):
            eye = np.zeros((self.r, self.r), dtype=self.dtype)
            for i in range(self.r):
                eye[i, i] = 1
            self._sigma_pows = {0: eye}
        if k not in self._sigma_pows:
            mat = self._sigma1
            for i in range(1, k + 1):
                if i not in self._sigma_pows:
                    self._sigma_pows[i] = (self._sigma_pows[i - 1] @ mat) \
                        % self.pn
        return self._sigma_pows[k]

    def _build_sigma(self):
        """Matrix of sigma on the lift: generator -> digitwise Frobenius."""
        r = self.r
        gen_rep = tuple(1 if i == 1 else 0 for i in range(r))
        digits = self._rep_digits(gen_rep)
        sig_digits = [b.frobenius(1) for b in digits]
        sig_gen = self._digits_to_rep(sig_digits)
        # columns: coefficients of sig_gen^j
        cols = []
        power = tuple(1 if i == 0 else 0 for i in range(r))
        for _ in range(r):
            cols.append(power)
            power = self.rep_mul(power, sig_gen)
        mat = np.zeros((r, r), dtype=self.dtype)
        for j, col in enumerate(cols):
            for i in range(r):
                mat[i, j] = col[i]
        return mat

    # ------------------------------------------------------- scalar reps
    #
    # Scalar reps are tuples of ints of length r; they feed WittElement
    # and the setup paths (digits, Teichmuller, sigma bootstrap).

    @property
    def zero_rep(self):
        return (0,) * self.r

    @property
    def one_rep(self):
        return (1,) + (0,) * (self.r - 1)

    def rep_add(self, a, b):
        return tuple((x + y) % self.pn for x, y in zip(a, b))

    def rep_sub(self, a, b):
        return tuple((x - y) % self.pn for x, y in zip(a, b))

    def rep_neg(self, a):
        return tuple((-x) % self.pn for x in a)

    def rep_mul(self, a, b):
        r, pn = self.r, self.pn
        if r == 1:
            return ((a[0] * b[0]) % pn,)
        conv = [0] * (2 * r - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    conv[i + j] = (conv[i + j] + x * y) % pn
        out = list(conv[:r])
        for k in range(r - 1):
            c = conv[r + k]
            if c:
                for j in range(r):
                    out[j] = (out[j] + c * int(self._redmat[k, j])) % pn
        return tuple(out)

    def rep_val(self, a):
        if all(x == 0 for x in a):
            return self.s
        v = 0
        work = list(a)
        while all(x % self.p == 0 for x in work):
            work = [x // self.p for x in work]
            v += 1
        return v

    def rep_pdiv(self, a, k=1):
        return tuple(x // self.p ** k for x in a)

    def rep_inverse(self, a):
        """Newton lift of the residue inverse; a must be a unit (val 0)."""
        res = self.rep_residue(a)
        if res.is_zero():
            raise DivisionByZero("inverse of a non-unit Witt element")
        inv0 = res.inverse()
        x = tuple(int(c) for c in inv0.coeffs)
        # x <- x(2 - a x), doubling correct digits each round
        steps = max(1, (self.s - 1).bit_length() + 1)
        two = tuple((2 if i == 0 else 0) for i in range(self.r))
        for _ in range(steps):
            x = self.rep_mul(x, self.rep_sub(two, self.rep_mul(a, x)))
        return x

    def rep_residue(self, a):
        return self.field.element(tuple(x % self.p for x in a))

    def rep_teichmuller(self, fe):
        """Teichmuller lift: raise any lift to the q^(s-1) power."""
        x = tuple(int(c) for c in fe.coeffs)
        e = self.field.order ** (self.s - 1)
        result = self.one_rep
        base = x
        while e:
            if e & 1:
                result = self.rep_mul(result, base)
            base = self.rep_mul(base, base)
            e >>= 1
        return result

    def _rep_digits(self, a):
        """Teichmuller digits b_i of a = sum p^i [b_i]."""
        digits = []
        work = a
        for _ in range(self.s):
            b = self.rep_residue(work)
            digits.append(b)
            work = self.rep_pdiv(self.rep_sub(work, self.rep_teichmuller(b)))
        return digits

    def _digits_to_rep(self, digits):
        acc = self.zero_rep
        pk = 1
        for b in digits:
            t = self.rep_teichmuller(b)
            acc = self.rep_add(acc, tuple((pk * c) % self.pn for c in t))
            pk *= self.p
        return acc

    def rep_to_coords(self, a):
        """Witt coordinates: a_i = b_i^(p^i) from the digit expansion."""
        return tuple(b.frobenius(i) for i, b in enumerate(self._rep_digits(a)))

    def coords_to_rep(self, coords):
        digits = [a.frobenius(-i) for i, a in enumerate(coords)]
        return self._digits_to_rep(digits)

    # --------------------------------------------------------- elements

    def element(self, rep):
        return WittElement(self, tuple(int(x) % self.pn for x in rep))

    @property
    def zero(self):
        return self.element(self.zero_rep)

    @property
    def one(self):
        return self.element(self.one_rep)

    def from_int(self, n):
        """Integer constant (image of Z in W_s through Z/p^s)."""
        return self.element((n % self.pn,) + (0,) * (self.r - 1))

    def from_coords(self, coords):
        out = []
        for c in coords:
            if isinstance(c, FieldElement):
                if c.field is not self.field:
                    raise DescriptorMismatch("coordinate from a wrong field")
                out.append(c)
            else:
                out.append(self.field.element(c))
        if len(out) != self.s:
            raise BadParameter(f"need {self.s} coordinates, got {len(out)}")
        return self.element(self.coords_to_rep(out))

    def teichmuller(self, fe):
        if isinstance(fe, int):
            fe = self.field.element(fe)
        if fe.field is not self.field:
            raise DescriptorMismatch("Teichmuller input from a wrong field")
        return self.element(self.rep_teichmuller(fe))

    def random_element(self, rng):
        return self.element(tuple(rng.randrange(self.pn)
                                  for _ in range(self.r)))


class WittElement:
    """Immutable element of W_s(F_{p^r})."""

    __slots__ = ("ring", "rep", "_coords")

    def __init__(self, ring, rep):
        self.ring = ring
        self.rep = rep
        self._coords = None

    def _check(self, other):
        if not isinstance(other, WittElement):
            raise TypeError(f"cannot combine WittElement with {type(other)}")
        if other.ring is not self.ring:
            raise DescriptorMismatch(
                f"Witt ring mismatch: {self.ring} vs {other.ring}")

    @property
    def coords(self):
        if self._coords is None:
            self._coords = self.ring.rep_to_coords(self.rep)
        return self._coords

    def coord_ints(self):
        """Flat serialization: coordinate-major, low-degree-first, r*s ints."""
        out = []
        for a in self.coords:
            out.extend(int(c) for c in a.coeffs)
        return out

    def __add__(self, other):
        self._check(other)
        return WittElement(self.ring, self.ring.rep_add(self.rep, other.rep))

    def __sub__(self, other):
        self._check(other)
        return WittElement(self.ring, self.ring.rep_sub(self.rep, other.rep))

    def __neg__(self):
        return WittElement(self.ring, self.ring.rep_neg(self.rep))

    def __mul__(self, other):
        self._check(other)
        return WittElement(self.ring, self.ring.rep_mul(self.rep, other.rep))

    def inverse(self):
        return WittElement(self.ring, self.ring.rep_inverse(self.rep))

    def val(self):
        return self.ring.rep_val(self.rep)

    def is_zero(self):
        return all(x == 0 for x in self.rep)

    def sigma(self, k=1):
        R = self.ring
        if R.r == 1:
            return self
        mat = R.sigma_matrix(k % R.r)
        vec = np.array(self.rep, dtype=R.dtype)
        return WittElement(R, tuple(int(x) % R.pn for x in (mat @ vec)))

    def verschiebung(self):
        """V(a_0,...,a_{s-1}) = (0, a_0, ..., a_{s-2}) = p * sigma^{-1}."""
        shifted = self.sigma(-1)
        return WittElement(self.ring, tuple(
            (self.ring.p * x) % self.ring.pn for x in shifted.rep))

    def pmul(self):
        return WittElement(self.ring, tuple(
            (self.ring.p * x) % self.ring.pn for x in self.rep))

    def pdiv(self):
        """Exact divide-by-p; valid to precision s-1 (top coordinate free)."""
        if self.val() < 1:
            raise NotDivisible("divide-by-p of an element with val 0")
        return WittElement(self.ring, self.ring.rep_pdiv(self.rep))

    def reduce(self, t):
        """Canonical representative mod p^t."""
        pt = self.ring.p ** min(t, self.ring.s)
        return WittElement(self.ring, tuple(x % pt for x in self.rep))

    def __eq__(self, other):
        return (isinstance(other, WittElement)
                and other.ring is self.ring and other.rep == self.rep)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((id(self.ring), self.rep))

    def __repr__(self):
        if self.ring.r == 1:
            return f"W({self.rep[0]})"
        return f"W{list(self.rep)}"


def witt_sigma(x, direction="forward"):
    return x.sigma(1 if direction == "forward" else -1)


def witt_verschiebung_and_pmul(x, which):
    if which == "V":
        return x.verschiebung()
    if which == "pmul":
        return x.pmul()
    raise BadParameter(f"unknown op {which!r}")


def witt_val_and_pdiv(x, which):
    if which == "val":
        return x.val()
    if which == "divide-by-p":
        return x.pdiv()
    raise BadParameter(f"unknown op {which!r}")


def embed_witt(x, big_ring):
    """Embed along W_s(F_{p^r}) -> W_s(F_{p^{re}}), coordinatewise on coords."""
    from .fields import embed_element
    small = x.ring
    if small is big_ring:
        return x
    if (small.p, small.s) != (big_ring.p, big_ring.s):
        raise DescriptorMismatch("embedding requires equal p and s")
    if big_ring.r % small.r:
        raise DescriptorMismatch("embedding requires divisible degrees")
    if small.r == 1:
        # constants: the integer rep carries over unchanged
        return big_ring.element((x.rep[0],) + (0,) * (big_ring.r - 1))
    coords = [embed_element(a, big_ring.field) for a in x.coords]
    return big_ring.element(big_ring.coords_to_rep(coords))
