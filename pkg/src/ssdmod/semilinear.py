"""Sigma-semilinear operators on End(M) and their fixed points.

The Frobenius conjugation e -> Phi sigma(e) Phi^{-1} acts on the
flattened endomorphism space through the Kronecker matrix
Phi (x) (p Phi^{-1})^T with a sigma twist and a global p^{-1}; all
integral data, so lattice iteration stays exact.

Fixed points of an integral sigma-semilinear operator with unit
determinant are computed level by level: one F_p-linear solve for the
residue, then an additive (Artin-Schreier type) correction per Witt
level, escalating the coefficient field F_{p^re} until the systems
become solvable.  That escalation realizes the algebraically closed
field of the theory at desk scale.
"""

import numpy as np

from .errors import ExtensionCapExceeded
from .fields import embed_element, get_field
from .fplin import LinearSolver
from .matrices import WittMatrix, kron
from .witt import get_witt_ring

EXTENSION_CAP = 8


def vec_index(i, j, n):
    return i * n + j


def mat_to_vec(mat):
    """Row-major flattening of a WittMatrix into an (n^2, r) array."""
    n = mat.rows
    return mat.data.reshape(n * n, mat.ring.r).copy()


def vec_to_mat(ring, v, n, eff=None):
    return WittMatrix(ring, v.reshape(n, n, ring.r).copy(), eff)


def conjugation_operator(phi, p_phi_inv):
    """Integral matrix T with  e -> p^{-1} T sigma(vec e)  equal to
    Phi sigma(e) Phi^{-1} on End(M); pair with twist 1, scale shift -1."""
    return kron(phi, p_phi_inv.transpose())


def frobenius_square_operator(phi):
    """Matrix of phi^2 (sigma^2-semilinear): Phi sigma(Phi)."""
    return phi @ phi.sigma(1)


def embed_matrix_array(small_ring, big_ring, data):
    """Embed an (..., r_small) rep array into the bigger Witt ring."""
    if small_ring is big_ring:
        return data.copy()
    flat = data.reshape(-1, small_ring.r)
    out = big_ring.zeros((flat.shape[0],))
    if small_ring.r == 1:
        out[:, 0] = flat[:, 0]
    else:
        for idx in range(flat.shape[0]):
            x = small_ring.element(tuple(int(c) for c in flat[idx]))
            from .witt import embed_witt
            out[idx] = np.array(embed_witt(x, big_ring).rep,
                                dtype=big_ring.dtype)
    return out.reshape(data.shape[:-1] + (big_ring.r,))


class SemilinearSolver:
    """F_p-flattened solver for (1 - T sigma) over one coefficient field."""

    def __init__(self, ring, t_data):
        self.ring = ring
        self.R = t_data.shape[0]
        p, m = ring.p, ring.r
        field = ring.field
        frob = np.array(field.frobenius_matrix(1), dtype=np.int64) % p
        n = self.R * m
        big = np.zeros((n, n), dtype=np.int64)
        tbar = ring.arr_residue(t_data)
        for i in range(self.R):
            for j in range(self.R):
                coeffs = tbar[i, j]
                if coeffs.any():
                    mm = np.array(field.mul_matrix(
                        field.element(tuple(int(c) for c in coeffs))),
                        dtype=np.int64)
                    big[i * m:(i + 1) * m, j * m:(j + 1) * m] = (mm @ frob) % p
        self.rho_mat = big
        self.solver = LinearSolver((np.eye(n, dtype=np.int64) - big) % p, p)
        self.fix_solver = LinearSolver((big - np.eye(n, dtype=np.int64)) % p,
                                       p)

    def residue_flat(self, arr):
        """(R, m) residue int array -> flat F_p vector of length R*m."""
        return (arr.reshape(-1).astype(np.int64)) % self.ring.p

    def unflatten(self, vec):
        return vec.reshape(self.R, self.ring.r).astype(np.int64)

    def fixed_space(self):
        return self.fix_solver.nullspace()

    def solve_correction(self, delta_residue):
        """Solve (1 - rho)(w) = delta over the residue field, or None."""
        sol = self.solver.solve(self.residue_flat(delta_residue))
        return None if sol is None else self.unflatten(sol)


class _Unsolvable(Exception):
    pass


def fixed_point_basis(base_ring, t_matrix, cap=EXTENSION_CAP):
    """Basis of {c : T sigma(c) = c} spanning the full lattice.

    Returns (vectors, ring_e, e): vectors is an (R, R, r_e) array of R
    coordinate columns over W_s(F_{p^{r e}}).
    """
    R = t_matrix.rows
    p, r = base_ring.p, base_ring.r
    for e in range(1, cap + 1):
        ring_e = get_witt_ring(p, r * e, base_ring.s)
        t_e = embed_matrix_array(base_ring, ring_e, t_matrix.data)
        solver = SemilinearSolver(ring_e, t_e)
        null = solver.fixed_space()
        if len(null) != R:
            continue
        try:
            vectors = [_lift_fixed_vector(ring_e, t_e, solver,
                                          solver.unflatten(nv))
                       for nv in null]
        except _Unsolvable:
            continue
        return np.stack(vectors, axis=0), ring_e, e
    raise ExtensionCapExceeded(
        f"no extension up to degree {cap} carries a full fixed basis")


def _lift_fixed_vector(ring, t_data, solver, c0):
    """Level-by-level lift of a residue fixed vector to precision s."""
    c = (np.asarray(c0).astype(ring.dtype)) % ring.pn
    for level in range(1, ring.s):
        image = ring.arr_matvec(t_data, ring.arr_sigma(c, 1))
        defect = ring.arr_sub(c, image)
        if not defect.any():
            break
        pl = ring.p ** level
        assert int(ring.arr_val(defect).min()) >= level, \
            "fixed-point lift lost a level"
        delta = (-(defect // pl)) % ring.p
        w = solver.solve_correction(delta)
        if w is None:
            raise _Unsolvable
        c = (c + pl * w.astype(ring.dtype)) % ring.pn
    return c
