"""Universal Witt sum/product polynomials as an independent oracle.

Generated by the ghost-component recursion with exact integer
arithmetic.  Only the mod-p reductions are kept: if S_i is known mod p,
then S_i^(p^j) is determined mod p^(j+1), which is exactly the
precision the level-n numerator needs before its exact division by p^n.
This keeps the polynomials small enough for the oracle range (s <= ~5);
beyond that the monomial counts grow doubly exponentially, which is why
production arithmetic lives in witt.py instead.

Polynomials are dicts {exponent tuple: coeff} on 2s variables
(X_0..X_{s-1}, Y_0..Y_{s-1}), coefficients in [0, p).
"""

from functools import lru_cache

from .errors import BadParameter

# Levels beyond these are intractable symbolically (monomial counts grow
# doubly exponentially); the digit isomorphism in witt.py covers
# production arithmetic at any s.
def oracle_level_cap(p):
    return 5 if p == 2 else 4 if p == 3 else 3


def _poly_mul(f, g, modulus):
    out = {}
    for ef, cf in f.items():
        for eg, cg in g.items():
            c = (cf * cg) % modulus
            if c:
                key = tuple(a + b for a, b in zip(ef, eg))
                val = (out.get(key, 0) + c) % modulus
                if val:
                    out[key] = val
                else:
                    out.pop(key, None)
    return out


def _poly_pow(f, e, modulus):
    nvars = len(next(iter(f))) if f else 0
    result = {(0,) * nvars: 1}
    base = {k: c % modulus for k, c in f.items() if c % modulus}
    while e:
        if e & 1:
            result = _poly_mul(result, base, modulus)
        base = _poly_mul(base, base, modulus)
        e >>= 1
    return result


def _poly_addto(acc, f, scale, modulus):
    for k, c in f.items():
        val = (acc.get(k, 0) + scale * c) % modulus
        if val:
            acc[k] = val
        else:
            acc.pop(k, None)


def _monomial(nvars, var, exp, coeff):
    key = [0] * nvars
    key[var] = exp
    return {tuple(key): coeff}


@lru_cache(maxsize=None)
def universal_witt_polynomials(p, s):
    """(sum_polys, product_polys) mod p, levels 0..s-1, on 2s variables."""
    if s > oracle_level_cap(p):
        raise BadParameter(
            f"oracle polynomials capped at {oracle_level_cap(p)} levels "
            f"for p = {p}")
    nvars = 2 * s
    sums, prods = [], []
    for n in range(s):
        modulus = p ** (n + 1)
        num_s = {}
        num_p = {}
        # ghost components w_n(X), w_n(Y) are sparse
        ghost_x, ghost_y = {}, {}
        for i in range(n + 1):
            _poly_addto(ghost_x,
                        _monomial(nvars, i, p ** (n - i), 1), p ** i, modulus)
            _poly_addto(ghost_y,
                        _monomial(nvars, s + i, p ** (n - i), 1), p ** i,
                        modulus)
        _poly_addto(num_s, ghost_x, 1, modulus)
        _poly_addto(num_s, ghost_y, 1, modulus)
        _poly_addto(num_p, _poly_mul(ghost_x, ghost_y, modulus), 1, modulus)
        for i in range(n):
            power = p ** (n - i)
            # S_i known mod p determines S_i^(p^(n-i)) mod p^(n-i+1)
            pow_s = _poly_pow(sums[i], power, p ** (n - i + 1))
            pow_p = _poly_pow(prods[i], power, p ** (n - i + 1))
            _poly_addto(num_s, pow_s, -(p ** i), modulus)
            _poly_addto(num_p, pow_p, -(p ** i), modulus)
        pn = p ** n
        for poly, store in ((num_s, sums), (num_p, prods)):
            reduced = {}
            for k, c in poly.items():
                if c % pn:
                    raise AssertionError(
                        "ghost recursion numerator not divisible by p^n")
                c = (c // pn) % p
                if c:
                    reduced[k] = c
            store.append(reduced)
    return tuple(sums), tuple(prods)


def evaluate_poly(poly, field, xcoords, ycoords):
    """Evaluate a mod-p polynomial at field-element coordinate lists."""
    s = len(xcoords)
    values = list(xcoords) + [field.zero] * (s - len(xcoords))
    values += list(ycoords) + [field.zero] * (s - len(ycoords))
    acc = field.zero
    for exps, coeff in poly.items():
        term = field.element(coeff)
        for var, e in enumerate(exps):
            if e:
                term = term * (values[var] ** e)
        acc = acc + term
    return acc


def oracle_add(x, y):
    """Witt coordinates of x + y computed through the universal polynomials."""
    ring = x.ring
    sums, _ = universal_witt_polynomials(ring.p, ring.s)
    return tuple(evaluate_poly(sn, ring.field, x.coords, y.coords)
                 for sn in sums)


def oracle_mul(x, y):
    ring = x.ring
    _, prods = universal_witt_polynomials(ring.p, ring.s)
    return tuple(evaluate_poly(pn, ring.field, x.coords, y.coords)
                 for pn in prods)
