"""Exact arithmetic in finite fields F_{p^r}.

Elements are coefficient vectors over F_p (length r, low degree first)
modulo a deterministically chosen irreducible polynomial: for each (p, r)
we use the lexicographically smallest monic irreducible, coefficients
compared low-degree-first.  This makes descriptors reproducible across
runs, so two fields with equal (p, r) are always the identical object.
"""

from functools import lru_cache
from itertools import product

from .errors import BadParameter, DescriptorMismatch, DivisionByZero


def is_prime(n):
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        if n == q:
            return True
        if n % q == 0:
            return False
    i = 37
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def prime_factors(n):
    """Distinct prime factors of n by trial division (desk-scale n)."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- dense F_p[x] helpers; polys are lists of ints in [0, p), low degree first


def _poly_trim(f):
    while f and f[-1] == 0:
        f.pop()
    return f


def _poly_mulmod(f, g, mod, p):
    prod_ = [0] * (len(f) + len(g) - 1) if f and g else []
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                prod_[i + j] = (prod_[i + j] + a * b) % p
    return _poly_rem(prod_, mod, p)


def _poly_rem(f, mod, p):
    f = list(f)
    dm = len(mod) - 1
    for i in range(len(f) - 1, dm - 1, -1):
        c = f[i]
        if c:
            # mod is monic
            for j in range(dm + 1):
                f[i - dm + j] = (f[i - dm + j] - c * mod[j]) % p
    del f[dm:]
    while len(f) < dm:
        f.append(0)
    return f


def _poly_powmod(f, e, mod, p):
    result = [1] + [0] * (len(mod) - 2)
    base = _poly_rem(f, mod, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        e >>= 1
    return result


def _poly_gcd(f, g, p):
    f, g = _poly_trim(list(f)), _poly_trim(list(g))
    while g:
        inv = pow(g[-1], -1, p)
        g_monic = [(c * inv) % p for c in g]
        # remainder of f by g_monic
        r = list(f)
        while len(r) >= len(g_monic) and _poly_trim(r):
            if len(r) < len(g_monic):
                break
            c = r[-1]
            shift = len(r) - len(g_monic)
            for j, b in enumerate(g_monic):
                r[shift + j] = (r[shift + j] - c * b) % p
            _poly_trim(r)
        f, g = g, r
    return f


def _is_irreducible(coeffs, p):
    """coeffs: monic, low-degree-first, degree r >= 1."""
    r = len(coeffs) - 1
    if r == 1:
        return True
    x = [0, 1]
    # x^(p^r) == x mod f
    t = x
    for _ in range(r):
        t = _poly_powmod(t, p, coeffs, p)
    lhs = list(t)
    lhs[1] = (lhs[1] - 1) % p
    if _poly_trim(lhs):
        return False
    for ell in prime_factors(r):
        t = x
        for _ in range(r // ell):
            t = _poly_powmod(t, p, coeffs, p)
        diff = list(t)
        diff[1] = (diff[1] - 1) % p
        g = _poly_gcd(coeffs, diff, p)
        if len(g) - 1 != 0:
            return False
    return True


@lru_cache(maxsize=None)
def default_modulus(p, r):
    """Lexicographically smallest monic irreducible of degree r over F_p."""
    if not is_prime(p):
        raise BadParameter(f"p = {p} is not prime")
    if r < 1:
        raise BadParameter(f"extension degree r = {r} must be >= 1")
    for tail in product(range(p), repeat=r):
        coeffs = list(tail) + [1]
        if _is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise BadParameter(f"no irreducible polynomial found for ({p}, {r})")


@lru_cache(maxsize=None)
def get_field(p, r):
    return FieldDescriptor(p, r)


class FieldDescriptor:
    """The field F_{p^r} with its canonical modulus.  Use get_field(p, r)."""

    def __init__(self, p, r):
        self.p = p
        self.r = r
        self.modulus = default_modulus(p, r)
        self.order = p ** r

    def __repr__(self):
        return f"F_{{{self.p}^{self.r}}}"

    def element(self, coeffs):
        if isinstance(coeffs, int):
            coeffs = (coeffs % self.p,) + (0,) * (self.r - 1)
        coeffs = tuple(int(c) % self.p for c in coeffs)
        if len(coeffs) != self.r:
            raise BadParameter(
                f"need {self.r} coefficients, got {len(coeffs)}")
        return FieldElement(self, coeffs)

    @property
    def zero(self):
        return self.element(0)

    @property
    def one(self):
        return self.element(1)

    @property
    def gen(self):
        """The class of x (zero in the prime field, where the modulus is x)."""
        if self.r == 1:
            return self.zero
        return self.element((0, 1) + (0,) * (self.r - 2))

    def elements(self):
        """All field elements in lexicographic coefficient order."""
        for tail in product(range(self.p), repeat=self.r):
            yield FieldElement(self, tail)

    def random_element(self, rng):
        return FieldElement(
            self, tuple(rng.randrange(self.p) for _ in range(self.r)))

    @property
    def multiplicative_generator(self):
        """Smallest generator of the unit group, in lex coefficient order."""
        if not hasattr(self, "_gen_cache"):
            n = self.order - 1
            factors = prime_factors(n) if n > 1 else []
            found = None
            for a in self.elements():
                if a.is_zero():
                    continue
                if all(a ** (n // ell) != self.one for ell in factors):
                    found = a
                    break
            self._gen_cache = found
        return self._gen_cache

    # -- F_p-linear structure matrices (used to flatten semilinear systems)

    def mul_matrix(self, a):
        """r x r matrix over F_p of multiplication by a, acting on coeffs."""
        cols = []
        for j in range(self.r):
            basis_j = self.element(tuple(1 if i == j else 0
                                         for i in range(self.r)))
            cols.append((a * basis_j).coeffs)
        return [[cols[j][i] for j in range(self.r)] for i in range(self.r)]

    def frobenius_matrix(self, k=1):
        """Matrix of x -> x^(p^k) as an F_p-linear map on coefficients."""
        cols = []
        for j in range(self.r):
            basis_j = self.element(tuple(1 if i == j else 0
                                         for i in range(self.r)))
            cols.append(basis_j.frobenius(k).coeffs)
        return [[cols[j][i] for j in range(self.r)] for i in range(self.r)]


class FieldElement:
    """Immutable element of F_{p^r}; coeffs is a tuple, low degree first."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        self.field = field
        self.coeffs = tuple(int(c) % field.p for c in coeffs)

    def _check(self, other):
        if not isinstance(other, FieldElement):
            raise TypeError(f"cannot combine FieldElement with {type(other)}")
        if other.field is not self.field:
            raise DescriptorMismatch(
                f"field mismatch: {self.field} vs {other.field}")

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def __add__(self, other):
        self._check(other)
        return FieldElement(self.field, tuple(
            a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check(other)
        return FieldElement(self.field, tuple(
            a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        self._check(other)
        f = self.field
        prod_ = _poly_mulmod(list(self.coeffs), list(other.coeffs),
                             list(f.modulus), f.p)
        return FieldElement(f, tuple(prod_))

    def inverse(self):
        if self.is_zero():
            raise DivisionByZero("inverse of zero field element")
        return self ** (self.field.order - 2)

    def __pow__(self, e):
        f = self.field
        if e < 0:
            return self.inverse() ** (-e)
        result = _poly_powmod(list(self.coeffs), e, list(f.modulus), f.p)
        return FieldElement(f, tuple(result))

    def frobenius(self, k=1):
        """x -> x^(p^k); negative k uses the inverse automorphism."""
        f = self.field
        k %= f.r
        return self ** (f.p ** k) if k else self

    def __eq__(self, other):
        return (isinstance(other, FieldElement)
                and other.field is self.field
                and other.coeffs == self.coeffs)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((id(self.field), self.coeffs))

    def __repr__(self):
        return f"{list(self.coeffs)}"


def field_ops(a, b, which):
    """Dispatch helper: add / mul / inv-of-a on a shared descriptor."""
    if which == "add":
        return a + b
    if which == "mul":
        return a * b
    if which == "inv-of-a":
        return a.inverse()
    raise BadParameter(f"unknown field op {which!r}")


def field_frobenius(a, direction="forward"):
    if direction == "forward":
        return a.frobenius(1)
    if direction == "inverse":
        return a.frobenius(-1)
    raise BadParameter(f"unknown direction {direction!r}")


@lru_cache(maxsize=None)
def embedding(p, r_small, r_big):
    """Image of the degree-r_small generator inside F_{p^r_big}.

    Requires r_small | r_big.  The subfield is located as the kernel of
    Frobenius^{r_small} - 1 (an F_p-linear map), then scanned in a
    deterministic order for a root of the small modulus.  Returns the
    root as a FieldElement of the big field.
    """
    if r_big % r_small:
        raise BadParameter(f"{r_small} does not divide {r_big}")
    big = get_field(p, r_big)
    if r_small == 1:
        return big.one  # prime field: x is irrelevant, embedding is constants
    if r_small == r_big:
        return big.gen
    # kernel of Frob^{r_small} - I over F_p
    frob = big.frobenius_matrix(r_small)
    n = r_big
    mat = [[(frob[i][j] - (1 if i == j else 0)) % p for j in range(n)]
           for i in range(n)]
    basis = _fp_nullspace(mat, p)
    coeffs = default_modulus(p, r_small)
    for combo in product(range(p), repeat=len(basis)):
        if all(c == 0 for c in combo):
            continue
        vec = [0] * n
        for c, bvec in zip(combo, basis):
            if c:
                for i in range(n):
                    vec[i] = (vec[i] + c * bvec[i]) % p
        cand = big.element(tuple(vec))
        # evaluate the small modulus at cand
        acc = big.zero
        power = big.one
        for c in coeffs:
            if c:
                acc = acc + power * big.element(c)
            power = power * cand
        if acc.is_zero():
            return cand
    raise BadParameter("no root of subfield modulus found")  # unreachable


def embed_element(a, big):
    """Map a in F_{p^rs} into F_{p^rb} along the canonical embedding."""
    small = a.field
    if small is big:
        return a
    alpha = embedding(small.p, small.r, big.r)
    acc = big.zero
    power = big.one
    for c in a.coeffs:
        if c:
            acc = acc + power * big.element(c)
        power = power * alpha
    return acc


def _fp_nullspace(mat, p):
    """Nullspace basis of a dense F_p matrix given as lists (small sizes)."""
    rows = [list(r) for r in mat]
    n = len(rows)
    m = len(rows[0]) if rows else 0
    pivots = []
    rank = 0
    for col in range(m):
        piv = None
        for i in range(rank, n):
            if rows[i][col] % p:
                piv = i
                break
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [(c * inv) % p for c in rows[rank]]
        for i in range(n):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p
                           for a, b in zip(rows[i], rows[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        vec = [0] * m
        vec[fc] = 1
        for i, pc in enumerate(pivots):
            vec[pc] = (-rows[i][fc]) % p
        basis.append(vec)
    return basis
