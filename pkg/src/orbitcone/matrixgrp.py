"""Matrix models of the symmetric pairs and their Iwasawa machinery.

Four presets are shipped: a compact-subgroup case inside SL(2,R), the split
pairs (SL(2,R), SO(1,1)) and (SL(3,R), SO(2,1)), and the doubled group case
realized block-diagonally in SL(4,R).  The Cartan involution is always
Y -> -Y^T; the second involution is either Y -> -J Y^T J for a signature
matrix J or conjugation by the block swap.

Decompositions use one QR kernel for the upper-triangular base system;
every other positive system is handled by exact permutation bookkeeping.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np
from scipy.linalg import expm

from . import exactlin as ex
from .exactlin import Mat, Vec
from .parabolic import PositiveSystem, from_chamber, sigma_classification
from .rootsys import (SymmetricPairDatum, build_pair_datum, reflection_matrix,
                      restricted_roots, weyl_group)

COND_LIMIT = 1e8


class SingularInput(ValueError):
    pass


class IllConditioned(ValueError):
    pass


class NotUnipotent(ValueError):
    pass


class NotInNP(ValueError):
    pass


class NotInPH(ValueError):
    pass


def _np_vec(v) -> np.ndarray:
    return np.array([float(x) for x in v])


def _np_mat(m) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in m])


@dataclass(frozen=True, eq=False)
class IwasawaTriple:
    k: np.ndarray
    H: np.ndarray          # log of the A-part, ambient diagonal coordinates
    n: np.ndarray
    ill_conditioned: np.ndarray | bool = False


@dataclass(frozen=True, eq=False)
class Realization:
    name: str
    dim: int
    kappa: int                       # B(Y,Z) = kappa * tr(YZ)
    datum: SymmetricPairDatum
    kind: str                        # "J": sigma(Y) = -J Y^T J; "S": sigma(Y) = S Y S
    inv_np: np.ndarray
    h_basis: tuple[np.ndarray, ...]
    z_reps: tuple[np.ndarray, ...]
    weyl_gen_reps: tuple[tuple[Mat, np.ndarray], ...]

    def sigma_alg(self, Y: np.ndarray) -> np.ndarray:
        if self.kind == "J":
            return -self.inv_np @ np.swapaxes(Y, -1, -2) @ self.inv_np
        return self.inv_np @ Y @ self.inv_np

    def sigma_grp(self, g: np.ndarray) -> np.ndarray:
        if self.kind == "J":
            return self.inv_np @ np.swapaxes(np.linalg.inv(g), -1, -2) @ self.inv_np
        return self.inv_np @ g @ self.inv_np

    def theta_alg(self, Y: np.ndarray) -> np.ndarray:
        return -np.swapaxes(Y, -1, -2)

    def theta_grp(self, g: np.ndarray) -> np.ndarray:
        return np.swapaxes(np.linalg.inv(g), -1, -2)

    def pi_h(self, Y: np.ndarray) -> np.ndarray:
        return 0.5 * (Y + self.sigma_alg(Y))

    def killing(self, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        return self.kappa * np.trace(Y @ Z, axis1=-2, axis2=-1)

    def inner(self, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """<Y,Z> = -B(Y, theta Z) = kappa * tr(Y Z^T)."""
        return self.kappa * np.trace(Y @ np.swapaxes(Z, -1, -2), axis1=-2, axis2=-1)

    @cached_property
    def base_parabolic(self) -> PositiveSystem:
        cham = tuple(Fraction(self.dim - i) for i in range(self.dim))
        return from_chamber(self.datum, cham)

    @cached_property
    def restricted(self):
        return restricted_roots(self.datum)

    @cached_property
    def small_weyl(self):
        """Reflection group of the restricted roots carrying a plus space."""
        gens = frozenset(self.restricted.plus_set)
        return weyl_group(gens if gens else frozenset(), self.datum.gram)

    @cached_property
    def weyl_reps(self) -> dict[Mat, np.ndarray]:
        n = self.dim
        ident = ex.identity(n)
        reps = {ident: np.eye(n)}
        frontier = [ident]
        while frontier:
            nxt = []
            for w in frontier:
                for gen, gen_rep in self.weyl_gen_reps:
                    prod = ex.mat_mul(gen, w)
                    if prod not in reps:
                        reps[prod] = gen_rep @ reps[w]
                        nxt.append(prod)
            frontier = nxt
        missing = [w for w in self.small_weyl.elements if w not in reps]
        if missing:
            raise RuntimeError("Weyl representatives do not cover the reflection group")
        return reps

    @cached_property
    def q_proj_np(self) -> np.ndarray:
        return _np_mat(self.datum.q_projector)

    @cached_property
    def aq_basis_np(self) -> tuple[np.ndarray, ...]:
        return tuple(_np_vec(v) for v in self.datum.aq_basis)


def a_matrix(v) -> np.ndarray:
    """Diagonal matrix of an ambient coordinate vector; batched over v."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape + (v.shape[-1],))
    idx = np.arange(v.shape[-1])
    out[..., idx, idx] = v
    return out


def root_entry(alpha: Vec) -> tuple[int, int]:
    """Matrix position (i, j) of the root space for alpha = e_i - e_j."""
    i = j = None
    for k, c in enumerate(alpha):
        if c == 1:
            i = k
        elif c == -1:
            j = k
        elif c != 0:
            raise ValueError("root is not of the form e_i - e_j")
    if i is None or j is None:
        raise ValueError("root is not of the form e_i - e_j")
    return i, j


# --- preset registry -------------------------------------------------------

def _diag_frac(vals) -> Mat:
    n = len(vals)
    return tuple(tuple(Fraction(vals[i]) if i == j else Fraction(0)
                       for j in range(n)) for i in range(n))


def _gl_roots(n, pairs=None):
    out = []
    rng = pairs if pairs is not None else [(i, j) for i in range(n) for j in range(n) if i != j]
    for i, j in rng:
        v = [Fraction(0)] * n
        v[i], v[j] = Fraction(1), Fraction(-1)
        out.append(tuple(v))
    return out


def _rot90():
    return np.array([[0.0, -1.0], [1.0, 0.0]])


def _build_kostant_sl2() -> Realization:
    roots = _gl_roots(2)
    gram = _diag_frac([4, 4])
    sig = _diag_frac([-1, -1])
    mult = {r: (1, 1, 0) for r in roots}
    datum = build_pair_datum(roots, gram, sig, mult)
    lam = roots[0]
    gen = reflection_matrix(lam, gram)
    return Realization(
        name="kostant_sl2", dim=2, kappa=4, datum=datum,
        kind="J", inv_np=np.eye(2),
        h_basis=(np.array([[0.0, -1.0], [1.0, 0.0]]),),
        z_reps=(np.eye(2), -np.eye(2)),
        weyl_gen_reps=((gen, _rot90()),))


def _build_sl2_so11() -> Realization:
    roots = _gl_roots(2)
    gram = _diag_frac([4, 4])
    sig = _diag_frac([-1, -1])
    mult = {r: (1, 0, 1) for r in roots}
    datum = build_pair_datum(roots, gram, sig, mult)
    return Realization(
        name="sl2_so11", dim=2, kappa=4, datum=datum,
        kind="J", inv_np=np.diag([1.0, -1.0]),
        h_basis=(np.array([[0.0, 1.0], [1.0, 0.0]]),),
        z_reps=(np.eye(2), -np.eye(2)),
        weyl_gen_reps=())


def _build_sl3_so21() -> Realization:
    roots = _gl_roots(3)
    gram = _diag_frac([6, 6, 6])
    sig = _diag_frac([-1, -1, -1])
    mult = {}
    for r in roots:
        fixed_pair = r[2] == 0           # +-(e1 - e2) stays inside so(2) x so(1)
        mult[r] = (1, 1, 0) if fixed_pair else (1, 0, 1)
    datum = build_pair_datum(roots, gram, sig, mult)
    lam = next(r for r in roots if r[0] == 1 and r[1] == -1)
    gen = reflection_matrix(lam, gram)
    s12 = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    zs = (np.diag([1.0, 1.0, 1.0]), np.diag([-1.0, -1.0, 1.0]),
          np.diag([-1.0, 1.0, -1.0]), np.diag([1.0, -1.0, -1.0]))
    return Realization(
        name="sl3_so21", dim=3, kappa=6, datum=datum,
        kind="J", inv_np=np.diag([1.0, 1.0, -1.0]),
        h_basis=(np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
                 np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
                 np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])),
        z_reps=zs,
        weyl_gen_reps=((gen, s12),))


def _build_group_sl2() -> Realization:
    roots = _gl_roots(4, pairs=[(0, 1), (1, 0), (2, 3), (3, 2)])
    gram = _diag_frac([4, 4, 4, 4])
    swap = tuple(tuple(Fraction(1) if (i + 2) % 4 == j else Fraction(0)
                       for j in range(4)) for i in range(4))
    mult = {r: (1, None, None) for r in roots}
    datum = build_pair_datum(roots, gram, swap, mult)
    rest = restricted_roots(datum)
    lam = max(rest.plus_set)
    gen = reflection_matrix(lam, gram)
    rot2 = np.zeros((4, 4))
    rot2[:2, :2] = _rot90()
    rot2[2:, 2:] = _rot90()
    S = np.zeros((4, 4))
    S[:2, 2:] = np.eye(2)
    S[2:, :2] = np.eye(2)
    e = np.zeros((4, 4))
    e[0, 1] = e[2, 3] = 1.0
    f = e.T.copy()
    return Realization(
        name="group_sl2", dim=4, kappa=4, datum=datum,
        kind="S", inv_np=S,
        h_basis=(np.diag([1.0, -1.0, 1.0, -1.0]), e, f),
        z_reps=(np.eye(4), -np.eye(4)),
        weyl_gen_reps=((gen, rot2),))


PRESETS = {
    "kostant_sl2": _build_kostant_sl2,
    "sl2_so11": _build_sl2_so11,
    "sl3_so21": _build_sl3_so21,
    "group_sl2": _build_group_sl2,
}


@lru_cache(maxsize=None)
def realization(name: str) -> Realization:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name]()


# --- permutation bookkeeping -----------------------------------------------

_PERM_CACHE: dict[tuple[str, tuple], np.ndarray] = {}


def chamber_perm(rz: Realization, P: PositiveSystem) -> np.ndarray:
    """Permutation matrix w with w(Sigma(base)) = Sigma(P)."""
    key = (rz.name, P.key())
    if key in _PERM_CACHE:
        return _PERM_CACHE[key]
    n = rz.dim
    base_pos = rz.base_parabolic.positive
    target = P.positive
    for perm in itertools.permutations(range(n)):
        w = tuple(tuple(Fraction(1) if perm[c] == r else Fraction(0)
                        for c in range(n)) for r in range(n))
        if frozenset(ex.mat_vec(w, a) for a in base_pos) == target:
            _PERM_CACHE[key] = _np_mat(w)
            return _PERM_CACHE[key]
    raise ValueError("positive system is not a coordinate permutation of the base")


def _is_base(rz: Realization, P: PositiveSystem | None) -> bool:
    return P is None or P.positive == rz.base_parabolic.positive


# --- Iwasawa decomposition -------------------------------------------------

def iwasawa(rz: Realization, g, P: PositiveSystem | None = None,
            strict: bool = False) -> IwasawaTriple:
    """K A N_P factorization by permuted QR; accepts stacked input (..., n, n)."""
    g = np.asarray(g, dtype=float)
    single = g.ndim == 2
    G = g[None] if single else g
    if not np.all(np.isfinite(G)):
        raise SingularInput("input matrix has non-finite entries")
    base = _is_base(rz, P)
    if not base:
        w = chamber_perm(rz, P)
        Gp = w.T @ G @ w
    else:
        Gp = G
    q, r = np.linalg.qr(Gp)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    if np.min(np.abs(d)) < 1e-250:
        raise SingularInput("matrix is numerically singular")
    s = np.sign(d)
    q = q * s[..., None, :]
    r = r * s[..., :, None]
    dpos = np.diagonal(r, axis1=-2, axis2=-1)
    H0 = np.log(dpos)
    n0 = r / dpos[..., :, None]
    sv = np.linalg.svd(Gp, compute_uv=False)
    ill = sv[..., 0] / sv[..., -1] > COND_LIMIT
    if strict and np.any(ill):
        raise IllConditioned("condition number exceeds the trust threshold")
    if not base:
        q = w @ q @ w.T
        n0 = w @ n0 @ w.T
        H0 = H0 @ w.T
    if single:
        return IwasawaTriple(q[0], H0[0], n0[0], bool(ill[0]))
    return IwasawaTriple(q, H0, n0, ill)


def h_pq(rz: Realization, g, P: PositiveSystem | None = None,
         strict: bool = False) -> np.ndarray:
    """Projection of the Iwasawa log onto a_q, ambient coordinates."""
    tri = iwasawa(rz, g, P, strict)
    return tri.H @ rz.q_proj_np.T


# --- sampling --------------------------------------------------------------

def sample_H(rz: Realization, radius: float, count: int, seed: int) -> np.ndarray:
    """Draw count elements z * exp(Y), Y Gaussian in h clipped to |Y| <= radius."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    rng = np.random.Generator(np.random.PCG64(seed))
    dh = len(rz.h_basis)
    coef = rng.normal(0.0, radius / 2.0 if radius > 0 else 0.0, size=(count, dh))
    basis = np.stack(rz.h_basis)
    Y = np.einsum("cd,dij->cij", coef, basis)
    norms = np.sqrt(np.sum(Y * Y, axis=(-2, -1)))
    scale = np.where(norms > radius, np.where(norms > 0, radius / np.maximum(norms, 1e-300), 1.0), 1.0)
    Y = Y * scale[:, None, None]
    zs = np.stack(rz.z_reps)[rng.integers(0, len(rz.z_reps), size=count)]
    return zs @ expm(Y)


# --- unipotent factorizations ----------------------------------------------

def unipotent_log(rz: Realization, m) -> np.ndarray:
    """Finite Mercator series; exact for unipotent input, batched."""
    m = np.asarray(m, dtype=float)
    n = rz.dim
    M = m - np.eye(n)
    power = M.copy()
    out = M.copy()
    for k in range(2, n):
        power = power @ M
        out = out + ((-1) ** (k + 1) / k) * power
    tail = np.abs(power @ M).max() if n > 1 else 0.0
    if tail > 1e-9 * (1.0 + np.abs(M).max() ** n):
        raise NotUnipotent("matrix is not unipotent")
    return out


def _support_mask(rz: Realization, alphas) -> np.ndarray:
    mask = np.zeros((rz.dim, rz.dim), dtype=bool)
    for a in alphas:
        mask[root_entry(a)] = True
    return mask


def default_z_q(rz: Realization, P: PositiveSystem | None = None) -> Vec:
    """Exact element of a_q, positive on Sigma(P, sigma-theta) and regular."""
    P = P if P is not None else rz.base_parabolic
    d = rz.datum
    pos = sorted(P.positive)
    st_part = sigma_classification(P).sigmatheta_part
    for prime in (97, 991, 9973, 99991):
        z_p = ex.zeros(rz.dim)
        for k, alpha in enumerate(pos):
            z_p = ex.add(z_p, ex.scale(Fraction(prime + k, prime), alpha))
        if any(ex.dot(a, z_p) <= 0 for a in pos):
            continue
        z_q = ex.sub(z_p, ex.mat_vec(d.sigma_on_a, z_p))
        if any(ex.dot(a, z_q) <= 0 for a in st_part):
            continue
        if any(ex.dot(a, z_q) == 0 and not d.in_ah_star(a) for a in d.roots):
            continue
        return z_q
    raise ArithmeticError("no valid splitting element found")


def _split_ops(rz: Realization, P: PositiveSystem, z_q: Vec):
    """Linear maps (flattened) sending supported log matrices to (u, v) parts."""
    n = rz.dim
    U_op = np.zeros((n * n, n * n))
    V_op = np.zeros((n * n, n * n))
    for alpha in sorted(P.positive):
        i, j = root_entry(alpha)
        col = i * n + j
        E = np.zeros((n, n))
        E[i, j] = 1.0
        sgn = ex.dot(alpha, z_q)
        if sgn > 0:
            U_op[col, col] = 1.0
        elif sgn == 0:
            V_op[:, col] = E.reshape(-1)        # root space already inside h
        else:
            sE = rz.sigma_alg(E)
            V_op[:, col] = (E + sE).reshape(-1)
            U_op[:, col] = (-sE).reshape(-1)
    return U_op, V_op


def factor_nilpotent(rz: Realization, m, P: PositiveSystem | None = None,
                     z_q: Vec | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Split n in N_P as n_plus * n_H; accepts stacked input (..., n, n)."""
    P = P if P is not None else rz.base_parabolic
    m = np.asarray(m, dtype=float)
    L = unipotent_log(rz, m)
    mask = _support_mask(rz, P.positive)
    off = np.abs(np.where(mask, 0.0, L)).max()
    if off > 1e-9 * (1.0 + np.abs(L).max()):
        raise NotInNP("log is not supported on the positive root spaces")
    z_q = z_q if z_q is not None else default_z_q(rz, P)
    U_op, V_op = _split_ops(rz, P, z_q)
    n = rz.dim
    flat = L.reshape(L.shape[:-2] + (n * n,))
    u = (flat @ U_op.T).reshape(L.shape)
    v = (flat @ V_op.T).reshape(L.shape)
    tol = 1e-14 * (1.0 + np.abs(L).max())
    for _ in range(80):
        resid = unipotent_log(rz, expm(u) @ expm(v)) - L
        if np.abs(resid).max() <= tol:
            break
        rflat = resid.reshape(L.shape[:-2] + (n * n,))
        u = u - (rflat @ U_op.T).reshape(L.shape)
        v = v - (rflat @ V_op.T).reshape(L.shape)
    else:
        raise ArithmeticError("nilpotent factorization did not converge")
    return expm(u), expm(v)


def check_PH_split(rz: Realization, p, P: PositiveSystem | None = None
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Split p in P cap H as (diagonal Levi part, unipotent part), both in H."""
    p = np.asarray(p, dtype=float)
    scale = 1.0 + np.abs(p).max()
    if np.abs(rz.sigma_grp(p) - p).max() > 1e-9 * scale:
        raise NotInPH("matrix is not fixed by the involution")
    base = _is_base(rz, P)
    w = None if base else chamber_perm(rz, P)
    pp = p if base else w.T @ p @ w
    if np.abs(np.tril(pp, -1)).max() > 1e-9 * scale:
        raise NotInPH("matrix is not in the parabolic")
    dg = np.diagonal(pp)
    if np.min(np.abs(dg)) < 1e-250:
        raise SingularInput("matrix is numerically singular")
    l0 = np.diag(dg)
    n0 = np.diag(1.0 / dg) @ pp
    if base:
        return l0, n0
    return w @ l0 @ w.T, w @ n0 @ w.T


def gk_sample(rz: Realization, P: PositiveSystem, Q: PositiveSystem, x) -> np.ndarray:
    """Iwasawa log H_P of x in N_Q cap bar-N_P."""
    x = np.asarray(x, dtype=float)
    inter = Q.positive & P.negative
    L = unipotent_log(rz, x)
    mask = _support_mask(rz, inter)
    if np.abs(np.where(mask, 0.0, L)).max() > 1e-9 * (1.0 + np.abs(L).max()):
        raise NotInNP("log is not supported on the required root spaces")
    return iwasawa(rz, x, P).H


# --- Lie-algebra projections used by the Hessian layer ---------------------

def ek_projection(rz: Realization, V, P: PositiveSystem | None = None) -> np.ndarray:
    """Component in k of the decomposition g = k + a + n_P; batched."""
    V = np.asarray(V, dtype=float)
    base = _is_base(rz, P)
    Vp = V if base else None
    if not base:
        w = chamber_perm(rz, P)
        Vp = w.T @ V @ w
    low = np.tril(Vp, -1)
    k0 = low - np.swapaxes(low, -1, -2)
    if base:
        return k0
    return w @ k0 @ w.T


def weyl_rep(rz: Realization, w: Mat) -> np.ndarray:
    try:
        return rz.weyl_reps[w]
    except KeyError:
        raise KeyError("matrix is not an element of the small Weyl group") from None


def validate_realization(rz: Realization, seed: int = 0) -> dict[str, float]:
    """Max deviations of the structural invariants; all should be tiny."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n = rz.dim
    Y = rng.normal(size=(1000, n, n))
    errs = {}
    errs["involutions_commute"] = float(
        np.abs(rz.sigma_alg(rz.theta_alg(Y)) - rz.theta_alg(rz.sigma_alg(Y))).max())
    errs["sigma_squared"] = float(np.abs(rz.sigma_alg(rz.sigma_alg(Y)) - Y).max())
    errs["h_basis_fixed"] = max(
        float(np.abs(rz.sigma_alg(b) - b).max()) for b in rz.h_basis)
    sig_a = _np_mat(rz.datum.sigma_on_a)
    errs["sigma_on_a_matches"] = max(
        (float(np.abs(np.diagonal(rz.sigma_alg(a_matrix(_np_vec(v))))
                      - sig_a @ _np_vec(v)).max()) for v in rz.datum.a_basis),
        default=0.0)
    werr = 0.0
    for w, xw in rz.weyl_reps.items():
        werr = max(werr, float(np.abs(xw.T @ xw - np.eye(n)).max()))
        werr = max(werr, float(np.abs(rz.sigma_grp(xw) - xw).max()))
        wf = _np_mat(w)
        for v in rz.aq_basis_np:
            lhs = xw @ a_matrix(v) @ xw.T
            werr = max(werr, float(np.abs(lhs - a_matrix(wf @ v)).max()))
    errs["weyl_reps"] = werr
    zerr = 0.0
    for z in rz.z_reps:
        zerr = max(zerr, float(np.abs(z.T @ z - np.eye(n)).max()))
        zerr = max(zerr, float(np.abs(rz.sigma_grp(z) - z).max()))
        for v in rz.aq_basis_np:
            zerr = max(zerr, float(np.abs(z @ a_matrix(v) @ z.T - a_matrix(v)).max()))
    errs["z_reps"] = zerr
    return errs
