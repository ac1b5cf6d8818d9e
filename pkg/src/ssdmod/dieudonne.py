"""Supersingular Dieudonne modules (M, phi) and their invariants.

A module is a rank-2d standard lattice together with the matrix Phi of
the sigma-semilinear Frobenius in the distinguished basis (columns are
the images of basis vectors), subject to: Phi integral, p Phi^{-1}
integral, val(det Phi) = d.

Invariants computed here:
  * the profile f(i): the largest t with M inside p^t phi^i(M),
  * the endomorphism span O (stable intersection of phi-conjugates of
    End(M)) and the torsion exponent m: the least m with
    p^m End(M) inside O, cross-checked against the profile route,
  * q: the least q' such that the tau-closure (tau = p^{-1} phi^2) of
    phi^{q'}(M) stays inside M, with a fully re-checkable certificate,
  * kappa = ceil(q/2), cross-checked on the superspecial model,
  * the a-number dim M/(phi M + theta M) mod p,
  * elementary-divisor signatures of phi^i(M) in M.

The chain m <= q+1 <= d is enforced as a hard invariant of every
report.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (BadParameter, BoundViolated, CrosscheckFailed,
                     DescriptorMismatch, InconclusiveCutoff, NoStabilization,
                     NotDieudonne, NotUnimodular, PrecisionExhausted)
from .lattices import Lattice, _solve_triangular
from .matrices import WittMatrix, smith_normal_form
from .semilinear import (conjugation_operator, fixed_point_basis,
                         frobenius_square_operator, vec_to_mat)
from .witt import get_witt_ring

O_ITERATION_CAP = 64

CERTIFIED_FAMILIES = ("superspecial", "circulant", "perturbed-circulant",
                      "product")


def default_precision(d):
    return 2 * d + 8


def default_imax(d):
    return 4 * d + 8


class DieudonneModule:
    def __init__(self, ring, d, phi, label, params=None):
        self.ring = ring
        self.d = d
        self.phi = phi
        self.label = label
        self.params = dict(params or {})
        self._vmat = None
        self._ops = {}

    @property
    def rank(self):
        return 2 * self.d

    def __repr__(self):
        return f"DieudonneModule({self.label} over {self.ring})"

    # ------------------------------------------------------- validation

    def validate(self):
        """Diagnostics: integrality of Phi and p Phi^{-1}, det valuation."""
        sf = smith_normal_form(self.phi)
        checks = {"phi_integral": True}
        try:
            detval = sf.val_det()
        except PrecisionExhausted:
            detval = None
        checks["p_phi_inv_integral"] = (not any(sf.saturated)
                                        and max(sf.exponents, default=0) <= 1)
        checks["det_val"] = detval
        checks["det_val_ok"] = detval == self.d
        checks["ok"] = checks["p_phi_inv_integral"] and checks["det_val_ok"]
        return checks

    def verschiebung_matrix(self):
        """p Phi^{-1}, integral, exact to one level below working precision."""
        if self._vmat is None:
            sf = smith_normal_form(self.phi)
            if any(sf.saturated) or max(sf.exponents, default=0) > 1:
                raise NotDieudonne("p Phi^{-1} is not integral")
            ring = self.ring
            n = self.rank
            diag = ring.zeros((n, n))
            for i, e in enumerate(sf.exponents):
                diag[i, i, 0] = ring.p ** (1 - e)
            mid = WittMatrix(ring, diag, self.phi.eff)
            left_inv = sf.left  # L Phi R = D  =>  p Phi^{-1} = R (p D^{-1}) L
            out = sf.right @ mid @ left_inv
            self._vmat = WittMatrix(ring, out.data,
                                    max(1, self.phi.eff - 1))
        return self._vmat

    # --------------------------------------------------- phi as an operator

    def phi_vec(self, v):
        """phi(v) = Phi sigma(v) on an integral coordinate vector (2d, r)."""
        ring = self.ring
        v = np.asarray(v, dtype=ring.dtype) % ring.pn
        return ring.arr_matvec(self.phi.data, ring.arr_sigma(v, 1))

    def phi_orbit(self, v, i):
        if i < 0:
            raise BadParameter("orbit exponent must be >= 0")
        out = np.asarray(v, dtype=self.ring.dtype) % self.ring.pn
        for _ in range(i):
            out = self.phi_vec(out)
        return out

    def standard_lattice(self):
        return Lattice.standard(self.ring, self.rank, self.phi.eff)

    def phi_lattice_iterates(self, imax):
        """[M, phi(M), ..., phi^imax(M)] as canonical lattices."""
        out = self._ops.setdefault("iters", [self.standard_lattice()])
        while len(out) <= imax:
            out.append(out[-1].apply_semilinear(self.phi, twist=1))
        return out[:imax + 1]


# ------------------------------------------------------------ constructors


def make_superspecial(d, ring):
    """(N^d, phi): d blocks [[0, p], [1, 0]]; phi(x) = y, phi(y) = p x."""
    if d < 1:
        raise BadParameter("superspecial family needs d >= 1")
    n = 2 * d
    data = ring.zeros((n, n))
    for b in range(d):
        i = 2 * b
        data[i, i + 1, 0] = ring.p   # phi(y) = p x
        data[i + 1, i, 0] = 1        # phi(x) = y
    phi = WittMatrix(ring, data)
    return DieudonneModule(ring, d, phi, f"superspecial(d={d})", {"d": d})


def make_circulant(d, ring):
    """C_d: phi(e_i) = e_{i+1} for i <= d, p e_{i+1} beyond, indices mod 2d."""
    if d < 2:
        raise BadParameter("circulant family needs d >= 2")
    n = 2 * d
    data = ring.zeros((n, n))
    for i in range(n):
        target = (i + 1) % n
        data[target, i, 0] = 1 if i < d else ring.p
    phi = WittMatrix(ring, data)
    return DieudonneModule(ring, d, phi, f"circulant(d={d})", {"d": d})


def make_perturbed_circulant(d, ring):
    """The twist of C_d whose column d+1 gains p^{d-1} e_2."""
    if d < 2:
        raise BadParameter("perturbed circulant family needs d >= 2")
    if ring.s < d + 2:
        raise PrecisionExhausted(
            f"need s >= {d + 2} to distinguish p^{d - 1} from p^{d}",
            suggested_precision=d + 2)
    mod = make_circulant(d, ring)
    data = mod.phi.data.copy()
    # phi_1(e_{d+1}) = p e_{d+2} + p^{d-1} e_2 (1-indexed)
    data[1, d, 0] = (data[1, d, 0] + ring.p ** (d - 1)) % ring.pn
    phi = WittMatrix(ring, data)
    return DieudonneModule(ring, d, phi, f"perturbed-circulant(d={d})",
                           {"d": d})


def direct_sum(mods):
    if not mods:
        raise BadParameter("direct sum of nothing")
    ring = mods[0].ring
    for m in mods:
        if m.ring is not ring:
            raise DescriptorMismatch("direct sum over mixed rings")
    d = sum(m.d for m in mods)
    n = 2 * d
    data = ring.zeros((n, n))
    off = 0
    for m in mods:
        k = m.rank
        data[off:off + k, off:off + k] = m.phi.data
        off += k
    label = "product[" + ",".join(m.label for m in mods) + "]"
    return DieudonneModule(ring, d, WittMatrix(ring, data), label,
                           {"factors": [m.label for m in mods]})


def twist(module, g):
    """(M, g phi) for unimodular g."""
    sf = smith_normal_form(g)
    if not sf.is_unimodular:
        raise NotUnimodular("twist requires a unimodular g")
    phi = g @ module.phi
    return DieudonneModule(module.ring, module.d, phi,
                           f"twist[{module.label}]",
                           dict(module.params, twisted=True))


# ------------------------------------------------------------- invariants


def f_profile(module, imax):
    """f(0..imax): f(i) is the largest t with M inside p^t phi^i(M)."""
    out = []
    for lat in module.phi_lattice_iterates(imax):
        out.append(-lat.scale - lat.max_exponent())
    return out


def signature_sequence(module, imax):
    """Elementary-divisor exponents of phi^i(M) inside M, i = 0..imax."""
    out = []
    for lat in module.phi_lattice_iterates(imax):
        out.append(tuple(e + lat.scale for e in lat.snf_exponents()))
    return out


def supersingular_advisory(module, imax=None):
    """certified / likely / refuted, per constructor label or f-profile."""
    fam = module.label.split("(")[0].split("[")[0]
    if fam in CERTIFIED_FAMILIES and not module.params.get("twisted"):
        return "certified"
    imax = default_imax(module.d) if imax is None else imax
    prof = f_profile(module, imax)
    bound = 2 * module.d + 2
    for i, f in enumerate(prof):
        if abs(2 * f + i) > bound:
            return "refuted"
    return "likely"


def _require_supersingular(module):
    verdict = supersingular_advisory(module)
    if verdict == "refuted":
        raise BadParameter(
            f"{module.label}: input refuted as supersingular")
    return verdict


def compute_O_and_m(module):
    """The stable intersection O, the torsion exponent m, and a basis of
    the sigma-fixed endomorphisms whose Witt span is O.

    Iterates S <- End(M) /\\ phi-conjugate(S) from S = End(M); the first
    fixed point is O because the conjugation has unit determinant.
    """
    _require_supersingular(module)
    ring = module.ring
    n2 = module.rank ** 2
    t_end = conjugation_operator(module.phi, module.verschiebung_matrix())
    end_std = Lattice.standard(ring, n2, t_end.eff)
    current = end_std
    for _ in range(O_ITERATION_CAP):
        image = current.apply_semilinear(t_end, twist=1, scale_shift=-1)
        nxt = end_std.intersect(image)
        if nxt.equals(current):
            o_lattice = current
            break
        current = nxt
    else:
        raise NoStabilization(
            f"O iteration exceeded cap {O_ITERATION_CAP}")
    m = o_lattice.max_exponent() + o_lattice.scale
    t_o = _operator_in_o_coords(module, o_lattice, t_end)
    fixed_vecs, ring_e, ext_e = fixed_point_basis(ring, t_o)
    fixed_mats = _fixed_vectors_to_matrices(module, o_lattice, fixed_vecs,
                                            ring_e)
    return o_lattice, m, fixed_mats


def _operator_in_o_coords(module, o_lattice, t_end):
    """Integral matrix of the phi-conjugation in the O-basis."""
    ring = module.ring
    basis = o_lattice.basis  # (n2, R, r), R = n2, scale 0
    images = ring.arr_matmul(t_end.data, ring.arr_sigma(basis, 1))
    if int(ring.arr_val(images).min()) < 1:
        raise CrosscheckFailed("phi-conjugate of O left the p-scaled span")
    images = images // ring.p
    coords, ok = _solve_triangular(ring, basis, list(o_lattice.diag_exps),
                                   images, o_lattice.eff)
    if not ok:
        raise CrosscheckFailed("phi-conjugation does not stabilize O")
    return WittMatrix(ring, coords, min(t_end.eff, o_lattice.eff))


def _fixed_vectors_to_matrices(module, o_lattice, fixed_vecs, ring_e):
    """O-coordinate fixed vectors -> endomorphism matrices over ring_e."""
    from .semilinear import embed_matrix_array
    n = module.rank
    basis_e = embed_matrix_array(module.ring, ring_e, o_lattice.basis)
    out = []
    for k in range(fixed_vecs.shape[0]):
        vec = ring_e.arr_matvec(basis_e, fixed_vecs[k])
        out.append(vec_to_mat(ring_e, vec, n, o_lattice.eff))
    return out


def compute_m_crosscheck(module, imax=None):
    """m from the profile: iterate the normalized lattice recursion
    L -> normalized phi(L) until it revisits a state, taking the max of
    the per-step exponents; the state space is finite for supersingular
    modules, so a repeat is a proof of completeness."""
    imax = default_imax(module.d) if imax is None else imax
    lat = module.standard_lattice()
    seen = {lat.normalized_key()}
    best = 0
    for _ in range(imax):
        lat = lat.apply_semilinear(module.phi, twist=1)
        lat = lat.scaled(-lat.scale)  # drop the p-power: state only
        best = max(best, lat.max_exponent())
        key = lat.normalized_key()
        if key in seen:
            return best
        seen.add(key)
    raise InconclusiveCutoff(
        f"profile did not revisit a state within {imax} steps")


@dataclass
class SuperspecialCertificate:
    q: int
    lattice: Lattice
    checks: dict
    minimality_witness: tuple | None  # (failing lattice, column, scale)

    def verify(self, module):
        """Re-run every lattice-level check from scratch."""
        K = self.lattice
        ring = module.ring
        m_std = module.standard_lattice()
        phi_k = K.apply_semilinear(module.phi, twist=1)
        tau_op = frobenius_square_operator(module.phi)
        tau_k = K.apply_semilinear(tau_op, twist=2, scale_shift=-1)
        phiq_m = module.phi_lattice_iterates(self.q)[self.q]
        out = {
            "phi_stable": K.contains(phi_k),
            "phi2_eq_pK": tau_k.equals(K),
            "phiq_inside": K.contains(phiq_m),
            "inside_M": m_std.contains(K),
        }
        if self.q > 0:
            lat, col, scale = self.minimality_witness
            vals = ring.arr_val(lat.basis[:, col])
            out["witness_outside_M"] = int(vals.min()) + scale < 0
        return out


def compute_q(module):
    """Smallest q' whose tau-closure of phi^{q'}(M) stays inside M.

    tau = p^{-1} phi^2; the closure K = sum of tau-iterates is the
    minimal lattice over phi^{q'}(M) with phi^2 K = pK and phi K in K,
    i.e. the image of an embedded superspecial module.
    """
    _require_supersingular(module)
    d = module.d
    m_std = module.standard_lattice()
    tau_op = frobenius_square_operator(module.phi)
    cap = 4 * d + 8
    prev_failure = None
    iterates = module.phi_lattice_iterates(d)
    for q_try in range(d):
        K = iterates[q_try]
        for _ in range(cap):
            nxt = K + K.apply_semilinear(tau_op, twist=2, scale_shift=-1)
            if nxt.equals(K):
                break
            K = nxt
        else:
            raise NoStabilization(f"tau closure exceeded cap {cap}")
        if m_std.contains(K):
            cert = SuperspecialCertificate(
                q=q_try, lattice=K, checks={}, minimality_witness=None)
            if q_try > 0:
                bad_lat, col = prev_failure
                cert.minimality_witness = (bad_lat, col, bad_lat.scale)
            cert.checks = cert.verify(module)
            if not all(cert.checks.values()):
                raise CrosscheckFailed(
                    f"superspecial certificate failed: {cert.checks}")
            return cert
        # remember a witness column outside M for the minimality record
        ring = module.ring
        col = None
        for j in range(K.n):
            if int(ring.arr_val(K.basis[:, j]).min()) + K.scale < 0:
                col = j
                break
        prev_failure = (K, col)
    raise BoundViolated(f"no q <= d-1 = {d - 1} admits a superspecial hull")


def compute_kappa(q, module):
    """kappa = ceil(q/2), cross-checked against the elementary divisors
    of phi^q(N^d) inside N^d on the superspecial model of the same d."""
    kappa = (q + 1) // 2
    model = make_superspecial(module.d, module.ring)
    lat = model.phi_lattice_iterates(q)[q]
    largest = lat.max_exponent() + lat.scale
    if largest != kappa:
        raise CrosscheckFailed(
            f"kappa formula ceil({q}/2) = {kappa} but the superspecial "
            f"model gives {largest}")
    return kappa


def a_number(module):
    """dim over F_q of M / (phi M + theta M), theta the Verschiebung."""
    ring = module.ring
    n = module.rank
    phi_res = ring.arr_residue(module.phi.data)
    ver_res = ring.arr_residue(module.verschiebung_matrix().data)
    stacked = np.concatenate([phi_res, ver_res], axis=1)
    return n - _fq_rank(ring.field, stacked)


def _fq_rank(fieldd, arr):
    """Rank over F_q of an (n, m, r) residue coefficient array."""
    n, m = arr.shape[0], arr.shape[1]
    rows = [[fieldd.element(tuple(int(c) for c in arr[i, j]))
             for j in range(m)] for i in range(n)]
    rank = 0
    col = 0
    while rank < n and col < m:
        piv = None
        for i in range(rank, n):
            if not rows[i][col].is_zero():
                piv = i
                break
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][col].inverse()
        rows[rank] = [x * inv for x in rows[rank]]
        for i in range(n):
            if i != rank and not rows[i][col].is_zero():
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def truncation_compare(m1, m2, t):
    """'equal-on-the-nose' when Phi and p Phi^{-1} agree mod p^t."""
    if m1.ring is not m2.ring or m1.rank != m2.rank:
        raise DescriptorMismatch("truncation compare needs matching shapes")
    if t > m1.ring.s:
        raise BadParameter("t exceeds the working precision")
    same_phi = m1.phi.eq_mod(m2.phi, t)
    same_ver = m1.verschiebung_matrix().eq_mod(m2.verschiebung_matrix(), t)
    return "equal-on-the-nose" if (same_phi and same_ver) else "unknown"


@dataclass
class InvariantReport:
    label: str
    p: int
    r: int
    s: int
    d: int
    a: int
    f_profile: list
    m: int
    m_crosscheck: int
    q: int
    kappa: int
    signatures: list
    eff_prec_used: int
    advisory: str = "certified"

    def __post_init__(self):
        if not (self.m <= self.q + 1 <= self.d):
            raise BoundViolated(
                f"chain m <= q+1 <= d violated: m={self.m}, q={self.q}, "
                f"d={self.d} ({self.label})")
        if self.kappa != math.ceil(self.q / 2):
            raise CrosscheckFailed(
                f"kappa {self.kappa} != ceil(q/2) for q={self.q}")
        if self.m != self.m_crosscheck:
            raise CrosscheckFailed(
                f"m oracle disagreement: {self.m} vs {self.m_crosscheck}")

    def to_dict(self):
        return {
            "label": self.label, "p": self.p, "r": self.r, "s": self.s,
            "d": self.d, "a": self.a, "f_profile": list(self.f_profile),
            "m": self.m, "m_crosscheck": self.m_crosscheck, "q": self.q,
            "kappa": self.kappa,
            "signatures": [list(sig) for sig in self.signatures],
            "eff_prec_used": self.eff_prec_used, "advisory": self.advisory,
        }


def compute_invariants(module, imax=None):
    """Full invariant report; raises on any hard-invariant violation."""
    imax = default_imax(module.d) if imax is None else imax
    advisory = _require_supersingular(module)
    o_lattice, m, _ = compute_O_and_m(module)
    m2 = compute_m_crosscheck(module, imax)
    cert = compute_q(module)
    kappa = compute_kappa(cert.q, module)
    prof = f_profile(module, imax)
    sigs = signature_sequence(module, imax)
    eff_used = min(o_lattice.eff, cert.lattice.eff, module.phi.eff)
    return InvariantReport(
        label=module.label, p=module.ring.p, r=module.ring.r,
        s=module.ring.s, d=module.d, a=a_number(module), f_profile=prof,
        m=m, m_crosscheck=m2, q=cert.q, kappa=kappa, signatures=sigs,
        eff_prec_used=eff_used, advisory=advisory)


def module_over_default_ring(family, d, p, precision=None):
    """Constructor dispatch used by the CLI and the corpus runner."""
    s = default_precision(d) if precision is None else precision
    ring = get_witt_ring(p, 1, s)
    if family == "superspecial":
        return make_superspecial(d, ring)
    if family == "circulant":
        return make_circulant(d, ring)
    if family == "perturbed":
        return make_perturbed_circulant(d, ring)
    raise BadParameter(f"unknown family {family!r}")


def random_unimodular_twist(module, rng):
    """g = 1 + p X with X uniform integral; always unimodular."""
    ring = module.ring
    n = module.rank
    data = ring.zeros((n, n))
    for i in range(n):
        for j in range(n):
            for t in range(ring.r):
                data[i, j, t] = (ring.p * rng.randrange(ring.pn)) % ring.pn
        data[i, i, 0] = (data[i, i, 0] + 1) % ring.pn
    g = WittMatrix(ring, data, module.phi.eff)
    return twist(module, g), g
