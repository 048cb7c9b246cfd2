"""Critical-point analysis of the test functionals h -> <X, log-part of ah>.

The combinatorial layer (critical values, predicted Hessian signature,
predicted critical image) is exact rational arithmetic; the numeric layer
(gradients, finite-difference Hessians) runs on the matrix models and is
compared against it in the tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import expm

from . import exactlin as ex
from .exactlin import Mat, Vec
from .matrixgrp import Realization, a_matrix, h_pq, iwasawa, root_entry
from .parabolic import PositiveSystem, plus_minus, sigma_classification
from .polyhedra import Cone, PolyhedralSet, gamma_aq, omega
from .rootsys import weyl_group, weyl_orbit

SV_TOL = 1e-7


class NotRegular(ValueError):
    pass


class NotALocalMin(ValueError):
    pass


def _exact_vec(v) -> Vec:
    return tuple(Fraction(str(x)) if not isinstance(x, Fraction) else x for x in v)


def _exact_from_float_mat(m: np.ndarray) -> Mat:
    out = []
    for row in m:
        r = []
        for x in row:
            q = Fraction(round(float(x) * 2 ** 20), 2 ** 20)
            if abs(float(q) - float(x)) > 1e-9:
                raise ValueError("matrix entry is not recognizably rational")
            r.append(q)
        out.append(tuple(r))
    return tuple(out)


def ensure_regular(rz: Realization, a_log) -> Vec:
    a_log = _exact_vec(a_log)
    if ex.mat_vec(rz.datum.q_projector, a_log) != a_log:
        raise ValueError("base point must lie in a_q")
    for lam in rz.restricted.roots_q:
        if ex.dot(lam, a_log) == 0:
            raise NotRegular("a restricted root vanishes on the base point")
    return a_log


# --- scalar functional and gradient ----------------------------------------

def F(rz: Realization, a_log, X, h, P: PositiveSystem | None = None) -> np.ndarray:
    """<X, a_q-projection of the Iwasawa log of exp(a_log) h>; batched over h."""
    a = a_matrix(np.exp(np.asarray(a_log, dtype=float)))
    Xf = np.asarray(X, dtype=float)
    v = h_pq(rz, a @ np.asarray(h, dtype=float), P)
    G = np.array([[float(x) for x in row] for row in rz.datum.gram])
    return v @ (G @ Xf)


def grad_F(rz: Realization, a_log, X, h, P: PositiveSystem | None = None) -> np.ndarray:
    """Components B(U_i, Ad(n^{-1})X) over the h-basis, n the unipotent part."""
    a = a_matrix(np.exp(np.asarray(a_log, dtype=float)))
    Xm = a_matrix(np.asarray(X, dtype=float))
    tri = iwasawa(rz, a @ np.asarray(h, dtype=float), P)
    nn = tri.n
    adX = np.linalg.inv(nn) @ Xm @ nn
    basis = np.stack(rz.h_basis)
    return rz.kappa * np.einsum("dij,...ji->...d", basis, adX)


def critical_reps(rz: Realization, a_log) -> list[tuple[Mat, np.ndarray]]:
    """One representative x_w per small-Weyl element; needs a_log regular."""
    ensure_regular(rz, a_log)
    return [(w, rz.weyl_reps[w]) for w in rz.small_weyl.elements]


def critical_value(rz: Realization, a_log, X, w: Mat) -> Fraction:
    """<X, w^{-1} a_log> in the exact layer."""
    a_log = _exact_vec(a_log)
    X = _exact_vec(X)
    wln = ex.mat_vec(rz.small_weyl.inverse(w), a_log)
    return ex.dot(ex.mat_vec(rz.datum.gram, X), wln)


# --- subspaces of h --------------------------------------------------------

def _h_basis_exact(rz: Realization) -> tuple[Mat, ...]:
    return tuple(_exact_from_float_mat(b) for b in rz.h_basis)


def h_x_coords(rz: Realization, X) -> tuple[Vec, ...]:
    """Coordinates (over the h-basis) of a basis of the centralizer of X in h."""
    X = _exact_vec(X)
    n = rz.dim
    Xm = tuple(tuple(X[i] if i == j else Fraction(0) for j in range(n)) for i in range(n))
    cols = []
    for U in _h_basis_exact(rz):
        br = ex.mat_sub(ex.mat_mul(Xm, U), ex.mat_mul(U, Xm))
        cols.append(tuple(br[i][j] for i in range(n) for j in range(n)))
    A = tuple(tuple(col[k] for col in cols) for k in range(n * n))
    return tuple(ex.nullspace(A))


def nph_basis(rz: Realization, P: PositiveSystem | None = None) -> tuple[np.ndarray, ...]:
    """Basis of the sigma-fixed part of the nilpotent radical."""
    P = P if P is not None else rz.base_parabolic
    cls = sigma_classification(P)
    out = []
    seen = set()
    for alpha in sorted(cls.sigma_part):
        if alpha in seen:
            continue
        sa = rz.datum.sigma_root(alpha)
        seen.add(alpha)
        seen.add(sa)
        i, j = root_entry(alpha)
        E = np.zeros((rz.dim, rz.dim))
        E[i, j] = 1.0
        sE = rz.sigma_alg(E)
        if sa == alpha:
            if np.abs(sE - E).max() < 1e-12:
                out.append(E)
            continue
        out.append(E + sE)
    return tuple(out)


def kernel_dim(rz: Realization, X, P: PositiveSystem | None = None) -> int:
    """dim of (centralizer of X in h) + (nilpotent part inside h)."""
    P = P if P is not None else rz.base_parabolic
    vecs = []
    for coords in h_x_coords(rz, X):
        V = sum(float(c) * b for c, b in zip(coords, rz.h_basis))
        vecs.append(np.asarray(V).reshape(-1))
    for B in nph_basis(rz, P):
        vecs.append(B.reshape(-1))
    if not vecs:
        return 0
    M = np.stack(vecs)
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv > SV_TOL * max(1.0, sv[0])))


# --- Hessian ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HessianReport:
    w: Mat
    numeric_form: np.ndarray
    analytic_form: np.ndarray
    signature: tuple[int, int, int]


def analytic_hessian(rz: Realization, a_log, X, w: Mat,
                     P: PositiveSystem | None = None) -> np.ndarray:
    """Form <U_i, L_w U_j> with L_w assembled from the transport operator."""
    from .matrixgrp import ek_projection
    xw = rz.weyl_reps[w]
    a = a_matrix(np.exp(np.asarray(a_log, dtype=float)))
    aw = xw.T @ a @ xw
    aw_inv = np.linalg.inv(aw)
    Xm = a_matrix(np.asarray(X, dtype=float))
    basis = np.stack(rz.h_basis)
    V = aw @ basis @ aw_inv
    V = ek_projection(rz, V, P)
    V = aw @ V @ aw_inv
    V = Xm @ V - V @ Xm
    LV = -rz.pi_h(V)
    return rz.kappa * np.einsum("iab,jab->ij", basis, LV)


def numeric_hessian(rz: Realization, a_log, X, w: Mat,
                    P: PositiveSystem | None = None, step: float = 2e-3) -> np.ndarray:
    """Cross-stencil second differences of F at x_w, Richardson-extrapolated."""
    xw = rz.weyl_reps[w]
    basis = np.stack(rz.h_basis)
    dh = len(basis)

    def form_at(delta: float) -> np.ndarray:
        dirs = []
        for i in range(dh):
            for j in range(dh):
                for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                    dirs.append(si * delta * basis[i] + sj * delta * basis[j])
        Z = np.stack(dirs)
        vals = F(rz, a_log, X, xw @ expm(Z), P)
        vals = vals.reshape(dh, dh, 4)
        return (vals[..., 0] - vals[..., 1] - vals[..., 2] + vals[..., 3]) / (4 * delta * delta)

    d1 = form_at(step)
    d2 = form_at(step / 2)
    out = (4.0 * d2 - d1) / 3.0
    return 0.5 * (out + out.T)


def hessian(rz: Realization, a_log, X, w: Mat,
            P: PositiveSystem | None = None) -> HessianReport:
    ensure_regular(rz, a_log)
    num = numeric_hessian(rz, a_log, X, w, P)
    ana = analytic_hessian(rz, a_log, X, w, P)
    scale = max(np.abs(num).max(), 1.0)
    ev = np.linalg.eigvalsh(num)
    n_plus = int(np.sum(ev > SV_TOL * scale))
    n_minus = int(np.sum(ev < -SV_TOL * scale))
    n_zero = len(ev) - n_plus - n_minus
    return HessianReport(w=w, numeric_form=num, analytic_form=ana,
                         signature=(n_plus, n_zero, n_minus))


def transversal_signature(rz: Realization, report: HessianReport, X,
                          P: PositiveSystem | None = None) -> tuple[int, int, int]:
    """Signature of the numeric form restricted to the complement of its
    predicted kernel, orthogonal for the theta-twisted inner product."""
    P = P if P is not None else rz.base_parabolic
    dh = len(rz.h_basis)
    gram_h = np.array([[float(rz.inner(bi, bj)) for bj in rz.h_basis]
                       for bi in rz.h_basis])
    kern = []
    for coords in h_x_coords(rz, X):
        kern.append(np.array([float(c) for c in coords]))
    for B in nph_basis(rz, P):
        coords = _coords_in_h(rz, B)
        kern.append(coords)
    if kern:
        K = np.stack(kern)
        # complement: vectors v with (K G) v = 0
        M = K @ gram_h
        _, sv, vt = np.linalg.svd(M)
        rank = int(np.sum(sv > SV_TOL * max(1.0, sv[0] if len(sv) else 1.0)))
        T = vt[rank:].T
    else:
        T = np.eye(dh)
    if T.shape[1] == 0:
        return (0, 0, 0)
    form = T.T @ report.numeric_form @ T
    scale = max(np.abs(report.numeric_form).max(), 1.0)
    ev = np.linalg.eigvalsh(form)
    n_plus = int(np.sum(ev > SV_TOL * scale))
    n_minus = int(np.sum(ev < -SV_TOL * scale))
    return (n_plus, len(ev) - n_plus - n_minus, n_minus)


def _coords_in_h(rz: Realization, V: np.ndarray) -> np.ndarray:
    B = np.stack([b.reshape(-1) for b in rz.h_basis]).T
    sol, res, rank, sv = np.linalg.lstsq(B, V.reshape(-1), rcond=None)
    if np.abs(B @ sol - V.reshape(-1)).max() > 1e-9:
        raise ValueError("matrix is not in the span of the h-basis")
    return sol


# --- predicted signature ----------------------------------------------------

def _orbit_classes(P: PositiveSystem) -> list[frozenset]:
    """Classes of Sigma(P) under the four-group generated by the involutions."""
    d = P.datum
    seen = set()
    out = []
    for alpha in sorted(P.positive):
        if alpha in seen:
            continue
        orbit = {alpha, d.sigma_root(alpha), ex.neg(alpha),
                 ex.neg(d.sigma_root(alpha))}
        cls = frozenset(orbit & P.positive)
        seen |= cls
        out.append(cls)
    return out


def predicted_signature(rz: Realization, a_log, X, w: Mat,
                        P: PositiveSystem | None = None):
    """Exact positivity prediction plus per-orbit certificates."""
    P = P if P is not None else rz.base_parabolic
    a_exact = ensure_regular(rz, a_log)
    X = _exact_vec(X)
    d = rz.datum
    wln = ex.mat_vec(rz.small_weyl.inverse(w), a_exact)
    plus, minus = plus_minus(P)
    cls_sigma = sigma_classification(P).sigma_part
    posdef = (all(ex.dot(a, X) * ex.dot(a, wln) <= 0 for a in plus)
              and all(ex.dot(a, X) >= 0 for a in minus))
    certs = []
    for cls in _orbit_classes(P):
        alpha = min(cls)
        aX = ex.dot(alpha, X)
        awl = ex.dot(alpha, wln)
        dim_full, mp, mm = d.mult(alpha) if d.is_sigmatheta_fixed(alpha) \
            else (d.mult(alpha)[0], None, None)
        entry = {"root": [str(c) for c in alpha],
                 "alpha_X": str(aX), "alpha_w_log_a": str(awl)}
        decay = float(np.exp(-2.0 * float(awl)))
        if aX == 0:
            entry.update(case="a", transversal_dim=0, eigenvalues=[], positive=True)
        elif alpha in cls_sigma:
            scalar = 0.5 * float(aX) * (decay - 1.0 / decay)
            entry.update(case="b.1", transversal_dim=dim_full,
                         eigenvalues=[scalar], positive=bool(aX * awl < 0))
        elif not d.in_aq_star(alpha):
            lam1 = 0.5 * float(aX) * (decay - 1.0)
            lam2 = 0.5 * float(aX) * (decay + 1.0)
            entry.update(case="b.2.1", transversal_dim=2 * dim_full,
                         eigenvalues=[lam1, lam2],
                         positive=bool(aX > 0 and aX * awl < 0))
        else:
            lam_p = 0.5 * float(aX) * (decay - 1.0)
            lam_m = 0.5 * float(aX) * (decay + 1.0)
            eigs, ok = [], True
            if mp:
                eigs.append(lam_p)
                ok = ok and aX * awl < 0
            if mm:
                eigs.append(lam_m)
                ok = ok and aX > 0
            entry.update(case="b.2.2", transversal_dim=(mp or 0) + (mm or 0),
                         eigenvalues=eigs, positive=bool(ok))
        certs.append(entry)
    return posdef, tuple(certs)


def local_min_halfspace_check(rz: Realization, a_log, X, w: Mat,
                              om: PolyhedralSet | None = None,
                              P: PositiveSystem | None = None) -> bool:
    """All of the predicted image sits on the upper side of the level plane."""
    P = P if P is not None else rz.base_parabolic
    posdef, certs = predicted_signature(rz, a_log, X, w, P)
    if not posdef:
        raise NotALocalMin("a transversal direction has negative curvature")
    a_exact = _exact_vec(a_log)
    X = _exact_vec(X)
    if om is None:
        orbit = weyl_orbit(rz.small_weyl, a_exact)
        _, minus = plus_minus(P)
        om = omega(a_exact, orbit, gamma_aq(sorted(minus), rz.datum))
    gX = ex.mat_vec(rz.datum.gram, X)
    level = ex.dot(gX, ex.mat_vec(rz.small_weyl.inverse(w), a_exact))
    if any(ex.dot(gX, u) < level for u in om.vertices):
        return False
    if any(ex.dot(gX, g) < 0 for g in om.cone.generators):
        return False
    return True


# --- the predicted critical image ------------------------------------------

def omega_X(rz: Realization, a_log, X, P: PositiveSystem | None = None
            ) -> dict[Mat, PolyhedralSet]:
    """Per Weyl element: hull of the X-centralizer orbit plus the X-cut cone."""
    P = P if P is not None else rz.base_parabolic
    a_exact = _exact_vec(a_log)
    X = _exact_vec(X)
    d = rz.datum
    _, minus = plus_minus(P)
    cut = sorted(a for a in minus if ex.dot(a, X) == 0)
    gam = gamma_aq(cut, d) if cut else Cone((), ambient=rz.dim)
    vanishing = frozenset(lam for lam in rz.restricted.plus_set
                          if ex.dot(lam, X) == 0)
    W_X = weyl_group(vanishing, d.gram)
    out = {}
    for w in rz.small_weyl.elements:
        wln = ex.mat_vec(rz.small_weyl.inverse(w), a_exact)
        orbit = weyl_orbit(W_X, wln)
        out[w] = omega(wln, orbit, gam)
    return out


def sample_H_X(rz: Realization, X, radius: float, count: int, seed: int) -> np.ndarray:
    """Draw from the centralizer of X in H: z * exp(Y), Y in the fixed algebra."""
    rng = np.random.Generator(np.random.PCG64(seed))
    coords = h_x_coords(rz, X)
    if coords:
        C = np.array([[float(c) for c in row] for row in coords])
        basis = np.einsum("kd,dij->kij", C, np.stack(rz.h_basis))
        coef = rng.normal(0.0, radius / 2.0 if radius > 0 else 0.0,
                          size=(count, len(coords)))
        Y = np.einsum("ck,kij->cij", coef, basis)
        norms = np.sqrt(np.sum(Y * Y, axis=(-2, -1)))
        scale = np.where(norms > radius,
                         radius / np.maximum(norms, 1e-300), 1.0)
        Y = Y * scale[:, None, None]
    else:
        Y = np.zeros((count, rz.dim, rz.dim))
    zs = np.stack(rz.z_reps)[rng.integers(0, len(rz.z_reps), size=count)]
    return zs @ expm(Y)


def sample_NPH(rz: Realization, P: PositiveSystem | None = None,
               radius: float = 1.0, count: int = 1, seed: int = 0) -> np.ndarray:
    """Draw unipotent elements fixed by the involution."""
    P = P if P is not None else rz.base_parabolic
    rng = np.random.Generator(np.random.PCG64(seed))
    basis = nph_basis(rz, P)
    if not basis:
        return np.tile(np.eye(rz.dim), (count, 1, 1))
    coef = rng.normal(0.0, radius / 2.0, size=(count, len(basis)))
    Y = np.einsum("ck,kij->cij", coef, np.stack(basis))
    return expm(Y)


# --- vanishing patterns -----------------------------------------------------

def vanishing_patterns(rz: Realization, per_pattern: int = 10, seed: int = 0
                       ) -> list[tuple[frozenset, tuple[Vec, ...]]]:
    """Realizable zero-sets of restricted roots, with exact witnesses in a_q."""
    import itertools as it
    d = rz.datum
    pos = sorted({lam for lam in rz.restricted.roots_q
                  if lam > ex.neg(lam)})
    aq = d.aq_basis
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for r in range(len(pos) + 1):
        for s_tuple in it.combinations(pos, r):
            S = frozenset(s_tuple)
            rows = tuple(tuple(ex.dot(lam, b) for b in aq) for lam in sorted(S))
            if rows:
                null = ex.nullspace(rows)
            else:
                null = tuple(tuple(Fraction(1) if i == k else Fraction(0)
                                   for i in range(len(aq))) for k in range(len(aq)))
            if not null:
                if S == frozenset(pos):
                    out.append((S, (ex.zeros(rz.dim),)))
                continue
            lam_rows = {lam: tuple(ex.dot(lam, b) for b in aq) for lam in pos if lam not in S}
            if any(all(ex.dot(row, nv) == 0 for nv in null) for row in lam_rows.values()):
                continue
            wits = []
            attempts = 0
            while len(wits) < per_pattern and attempts < per_pattern * 50:
                attempts += 1
                cs = [Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 8)))
                      for _ in null]
                t = ex.zeros(len(aq))
                for c, nv in zip(cs, null):
                    t = ex.add(t, ex.scale(c, nv))
                Xv = ex.zeros(rz.dim)
                for c, b in zip(t, aq):
                    Xv = ex.add(Xv, ex.scale(c, b))
                if any(ex.dot(row, t) == 0 for row in lam_rows.values()):
                    continue
                wits.append(Xv)
            if len(wits) == per_pattern:
                out.append((S, tuple(wits)))
    return out
