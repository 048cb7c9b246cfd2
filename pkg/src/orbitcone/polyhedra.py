"""Exact polyhedral geometry for the orbit-polytope-plus-cone sets.

V-representations (vertices, cone generators) are primary; H-representations
are derived once per object by exact Fourier-Motzkin elimination and memoized.
Membership, pointedness and properness are decided by inequality slacks and by
exact LP feasibility, and the two routes are cross-checked.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from . import exactlin as ex
from .exactlin import Mat, Vec
from .parabolic import PositiveSystem, is_q_extreme, sigma_classification
from .rootsys import Root, SymmetricPairDatum, restricted_roots

Ineq = tuple[Vec, Fraction]     # (a, r) meaning a.x >= r


class ZeroRoot(ValueError):
    pass


class NotQExtreme(ValueError):
    pass


@dataclass(frozen=True)
class CorootVector:
    h_alpha: Vec          # alpha(H_alpha) = 2, B-orthogonal to ker alpha
    h_alpha_check: Vec    # <H_check, X>_B = alpha(X)


def coroot(alpha: Root, gram: Mat) -> CorootVector:
    alpha = ex.vec(alpha)
    if ex.is_zero(alpha):
        raise ZeroRoot("coroot of the zero functional")
    ginv = ex.mat_inv(ex.mat(gram))
    dual = ex.mat_vec(ginv, alpha)          # B(dual, .) = alpha
    denom = ex.dot(alpha, dual)
    return CorootVector(h_alpha=ex.scale(Fraction(2) / denom, dual),
                        h_alpha_check=dual)


def restricted_coroot(datum: SymmetricPairDatum, lam: Root) -> CorootVector:
    return coroot(lam, datum.gram)


# --- exact Fourier-Motzkin projection --------------------------------------

def _normalize(a: Sequence[Fraction], r: Fraction) -> Ineq:
    lead = next((x for x in a if x != 0), None)
    if lead is None:
        return tuple(a), r
    s = Fraction(1) / abs(lead)
    return tuple(s * x for x in a), s * r


def _prune(rows):
    seen, out = set(), []
    for a, r in rows:
        if all(x == 0 for x in a):
            if r > 0:
                raise ValueError("projection produced an infeasible row")
            continue
        key = _normalize(a, r)
        if key not in seen:
            seen.add(key)
            out.append((list(key[0]), key[1]))
    return out


def _fm_eliminate(rows, j):
    pos, neg, zero = [], [], []
    for a, r in rows:
        c = a[j]
        (pos if c > 0 else neg if c < 0 else zero).append((a, r))
    out = list(zero)
    for ap, rp in pos:
        for an, rn in neg:
            cp, cn = ap[j], -an[j]
            a = [cn * x + cp * y for x, y in zip(ap, an)]
            a[j] = Fraction(0)
            out.append((a, cn * rp + cp * rn))
    return out


def project_polyhedron(eqs, ineqs, n_keep: int) -> list[Ineq]:
    """Project {z : eq rows hold with equality, ineq rows with >=} onto the
    first n_keep coordinates.  Equalities are solved out first; remaining
    eliminated variables go through Fourier-Motzkin."""
    work_eqs = [([Fraction(x) for x in a], Fraction(r)) for a, r in eqs]
    work_ineqs = [([Fraction(x) for x in a], Fraction(r)) for a, r in ineqs]
    nvar = len((work_eqs + work_ineqs)[0][0])
    elim = list(range(n_keep, nvar))
    kept_eqs = []
    while work_eqs:
        a, r = work_eqs.pop()
        j = next((k for k in elim if a[k] != 0), None)
        if j is None:
            kept_eqs.append((a, r))
            continue
        c = a[j]
        expr = [x / c for x in a]
        expr[j] = Fraction(0)
        rr = r / c          # var_j = rr - expr . z

        def subst(rows):
            out = []
            for b, s in rows:
                cb = b[j]
                if cb != 0:
                    b = [x - cb * e for x, e in zip(b, expr)]
                    b[j] = Fraction(0)
                    s = s - cb * rr
                out.append((b, s))
            return out

        work_eqs = subst(work_eqs)
        work_ineqs = subst(work_ineqs)
        elim.remove(j)
    for j in elim:
        work_ineqs = _prune(_fm_eliminate(work_ineqs, j))
    rows = work_ineqs + kept_eqs + [([-x for x in a], -r) for a, r in kept_eqs]
    rows = _prune(rows)
    rows = _drop_implied(rows, n_keep)
    return sorted((tuple(a[:n_keep]), r) for a, r in rows)


def _drop_implied(rows, n: int):
    """Remove inequalities implied by the others (exact LP per row)."""
    rows = list(rows)
    i = 0
    while i < len(rows):
        others = rows[:i] + rows[i + 1:]
        if others and _implied(rows[i], others, n):
            rows.pop(i)
        else:
            i += 1
    return rows


def _implied(row, others, n: int) -> bool:
    a_i, r_i = row
    # min a_i.x subject to others, x free; x = u - v, slack per constraint
    m = len(others)
    A, b = [], []
    for k, (a_k, r_k) in enumerate(others):
        coef = [Fraction(x) for x in a_k[:n]] + [-Fraction(x) for x in a_k[:n]]
        coef += [Fraction(-1) if t == k else Fraction(0) for t in range(m)]
        A.append(tuple(coef))
        b.append(Fraction(r_k))
    c = [-Fraction(x) for x in a_i[:n]] + [Fraction(x) for x in a_i[:n]]
    c += [Fraction(0)] * m
    status, _, val = ex.lp_solve(tuple(A), tuple(b), tuple(c))
    if status != ex.OPTIMAL:
        return False
    return -val >= r_i


# --- cones and polyhedral sets ---------------------------------------------

@dataclass(frozen=True)
class Cone:
    generators: tuple[Vec, ...]
    ambient: int | None = None

    def __post_init__(self):
        gens = tuple(ex.vec(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if self.ambient is None:
            if not gens:
                raise ValueError("a cone with no generators needs an explicit ambient dimension")
            object.__setattr__(self, "ambient", len(gens[0]))

    @property
    def dim_ambient(self) -> int:
        return self.ambient

    @cached_property
    def hrep(self) -> tuple[Ineq, ...]:
        gens = [g for g in self.generators if not ex.is_zero(g)]
        if not gens:
            n = self.dim_ambient
            rows = []
            for i in range(n):
                e = [Fraction(0)] * n
                e[i] = Fraction(1)
                rows.append((tuple(e), Fraction(0)))
                rows.append((tuple(ex.neg(tuple(e))), Fraction(0)))
            return tuple(rows)
        n = len(gens[0])
        m = len(gens)
        # variables (x, nu): x - sum nu_i g_i = 0, nu >= 0
        eqs = []
        for i in range(n):
            row = [Fraction(0)] * (n + m)
            row[i] = Fraction(1)
            for k, g in enumerate(gens):
                row[n + k] = -g[i]
            eqs.append((row, Fraction(0)))
        ineqs = []
        for k in range(m):
            row = [Fraction(0)] * (n + m)
            row[n + k] = Fraction(1)
            ineqs.append((row, Fraction(0)))
        return tuple(project_polyhedron(eqs, ineqs, n))

    def contains_exact(self, x: Vec) -> bool:
        x = ex.vec(x)
        gens = [g for g in self.generators if not ex.is_zero(g)]
        if not gens:
            lp = ex.is_zero(x)
        else:
            A = tuple(tuple(g[i] for g in gens) for i in range(len(x)))
            lp = ex.feasible(A, x)
        hr = all(ex.dot(a, x) >= r for a, r in self.hrep)
        if lp != hr:
            raise AssertionError("LP and H-representation disagree on a cone point")
        return lp

    def slack(self, x) -> float:
        return _min_slack(self.hrep, x)

    def contains(self, x, tol: float = 1e-7) -> bool:
        if tol == 0:
            return self.contains_exact(ex.vec(x))
        return self.slack(x) >= -tol


def _min_slack(hrep, x) -> float:
    x = np.asarray(x, dtype=float)
    if not hrep:
        return float("inf")
    worst = float("inf")
    for a, r in hrep:
        av = np.array([float(c) for c in a])
        worst = min(worst, (av @ x - float(r)) / np.linalg.norm(av))
    return worst


@dataclass(frozen=True)
class PolyhedralSet:
    vertices: tuple[Vec, ...]
    cone: Cone

    def __post_init__(self):
        object.__setattr__(self, "vertices",
                           tuple(sorted(ex.vec(v) for v in self.vertices)))

    @cached_property
    def hrep(self) -> tuple[Ineq, ...]:
        V = self.vertices
        G = [g for g in self.cone.generators if not ex.is_zero(g)]
        n = len(V[0])
        nv, ng = len(V), len(G)
        # variables (x, lambda, mu): x = V^T lambda + G^T mu, sum lambda = 1
        eqs = []
        for i in range(n):
            row = [Fraction(0)] * (n + nv + ng)
            row[i] = Fraction(1)
            for k, v in enumerate(V):
                row[n + k] = -v[i]
            for k, g in enumerate(G):
                row[n + nv + k] = -g[i]
            eqs.append((row, Fraction(0)))
        srow = [Fraction(0)] * (n + nv + ng)
        for k in range(nv):
            srow[n + k] = Fraction(1)
        eqs.append((srow, Fraction(1)))
        ineqs = []
        for k in range(nv + ng):
            row = [Fraction(0)] * (n + nv + ng)
            row[n + k] = Fraction(1)
            ineqs.append((row, Fraction(0)))
        return tuple(project_polyhedron(eqs, ineqs, n))

    def contains_exact(self, x: Vec) -> bool:
        x = ex.vec(x)
        V = self.vertices
        G = [g for g in self.cone.generators if not ex.is_zero(g)]
        n = len(x)
        cols = list(V) + list(G)
        A = [tuple(c[i] for c in cols) for i in range(n)]
        A.append(tuple([Fraction(1)] * len(V) + [Fraction(0)] * len(G)))
        lp = ex.feasible(tuple(A), tuple(list(x) + [Fraction(1)]))
        hr = all(ex.dot(a, x) >= r for a, r in self.hrep)
        if lp != hr:
            raise AssertionError("LP and H-representation disagree on a point")
        return lp

    def slack(self, x) -> float:
        return _min_slack(self.hrep, x)

    def contains(self, x, tol: float = 1e-7) -> bool:
        if tol == 0:
            return self.contains_exact(ex.vec(x))
        return self.slack(x) >= -tol


def contains(obj, x, tol: float = 0.0) -> bool:
    """Membership with tolerance; exact when tol == 0 and x is rational."""
    return obj.contains(x, tol)


def contains_lp_float(obj: PolyhedralSet, x, tol: float = 1e-7) -> bool:
    """Independent float route: LP feasibility of the V-representation with
    an infinity-norm residual budget, via scipy."""
    from scipy.optimize import linprog
    x = np.asarray(x, dtype=float)
    V = np.array([[float(c) for c in v] for v in obj.vertices])
    G = [g for g in obj.cone.generators if not ex.is_zero(g)]
    G = np.array([[float(c) for c in g] for g in G]) if G else np.zeros((0, len(x)))
    n = len(x)
    nv, ng = len(V), len(G)
    # min t  s.t.  |V^T l + G^T m - x|_inf <= t, sum l = 1, l,m >= 0
    nvar = nv + ng + 1
    A_ub, b_ub = [], []
    M = np.vstack([V, G]).T if ng else V.T
    for i in range(n):
        row = np.zeros(nvar)
        row[:nv + ng] = M[i]
        row[-1] = -1.0
        A_ub.append(row.copy())
        b_ub.append(x[i])
        row2 = -row
        row2[-1] = -1.0
        A_ub.append(row2)
        b_ub.append(-x[i])
    A_eq = np.zeros((1, nvar))
    A_eq[0, :nv] = 1.0
    res = linprog(np.eye(nvar)[-1], A_ub=np.array(A_ub), b_ub=np.array(b_ub),
                  A_eq=A_eq, b_eq=[1.0], bounds=[(0, None)] * (nvar - 1) + [(None, None)])
    if not res.success:
        return False
    return res.x[-1] <= tol


# --- cone predicates -------------------------------------------------------

def is_pointed(cone: Cone) -> bool:
    """No line: there is no nonzero nonnegative combination summing to zero."""
    gens = [g for g in cone.generators if not ex.is_zero(g)]
    if not gens:
        return True
    n, m = len(gens[0]), len(gens)
    A = [tuple(g[i] for g in gens) for i in range(n)]
    A.append(tuple([Fraction(1)] * m))
    return not ex.feasible(tuple(A), tuple([Fraction(0)] * n + [Fraction(1)]))


def proper_on_cone(p: Mat, cone: Cone) -> bool:
    """ker p meets the cone only at 0."""
    gens = [g for g in cone.generators if not ex.is_zero(g)]
    if not gens:
        return True
    p = ex.mat(p)
    n, m = len(gens[0]), len(gens)
    pg = [ex.mat_vec(p, g) for g in gens]
    # K = {nu >= 0, sum nu = 1, (p g) nu = 0}; proper iff G nu = 0 on all of K
    A = [tuple(v[i] for v in pg) for i in range(len(pg[0]))]
    A.append(tuple([Fraction(1)] * m))
    b = tuple([Fraction(0)] * len(pg[0]) + [Fraction(1)])
    if not ex.feasible(A, b):
        return True
    for i in range(n):
        c = tuple(g[i] for g in gens)
        for sign in (1, -1):
            status, _, val = ex.lp_solve(A, b, ex.scale(sign, c))
            if status == ex.OPTIMAL and val > 0:
                return False
    return True


def contains_line(obj) -> bool:
    cone = obj.cone if isinstance(obj, PolyhedralSet) else obj
    return not is_pointed(cone)


def pointedness_certificate(cone: Cone) -> Vec | None:
    """An exact functional xi with xi.g > 0 for every nonzero generator, or
    None when the cone is not pointed."""
    gens = [g for g in cone.generators if not ex.is_zero(g)]
    n = cone.dim_ambient
    if not gens:
        return tuple([Fraction(0)] * n)
    # find xi with xi.g >= 1 for all g: feasibility with free xi
    m = len(gens)
    A, b = [], []
    for k, g in enumerate(gens):
        row = list(g) + [-x for x in g]
        row += [Fraction(-1) if t == k else Fraction(0) for t in range(m)]
        A.append(tuple(row))
        b.append(Fraction(1))
    st, x, _ = ex.lp_solve(tuple(A), tuple(b), None)
    if st != ex.OPTIMAL:
        return None
    xi = tuple(u - v for u, v in zip(x[:n], x[n:2 * n]))
    assert all(ex.dot(xi, g) > 0 for g in gens)
    return xi


# --- the cones of the theory ----------------------------------------------

def gamma_a(roots: Sequence[Root], gram: Mat) -> Cone:
    """Cone generated by the coroots H_alpha over the given roots."""
    gens = tuple(coroot(a, gram).h_alpha for a in sorted(set(map(ex.vec, roots))))
    return Cone(gens, ambient=len(gram))


def gamma_aq(roots: Sequence[Root], datum: SymmetricPairDatum) -> Cone:
    """pr_q of gamma_a: generators pr_q(H_alpha)."""
    gens = tuple(datum.pr_q(coroot(a, datum.gram).h_alpha)
                 for a in sorted(set(map(ex.vec, roots))))
    return Cone(gens, ambient=len(datum.gram))


def gamma_cone(P: PositiveSystem) -> Cone:
    """Generators pr_q(H_alpha) over Sigma(P)_-."""
    c = sigma_classification(P)
    return gamma_aq(sorted(c.minus_part), P.datum)


def upsilon_cone(P: PositiveSystem) -> Cone:
    """Restricted-coroot cone over Delta^+_-; q-extreme systems only.
    Verified exactly against gamma_cone(P) by mutual generator membership."""
    if not is_q_extreme(P):
        raise NotQExtreme("upsilon cone needs a q-extreme positive system")
    d = P.datum
    c = sigma_classification(P)
    rest = restricted_roots(d)
    delta_plus = {d.restrict(a) for a in c.sigmatheta_part}
    delta_plus.discard(ex.zeros(len(d.gram)))
    delta_minus = sorted(lam for lam in delta_plus if lam in rest.minus_set)
    ups = Cone(tuple(restricted_coroot(d, lam).h_alpha for lam in delta_minus),
               ambient=len(d.gram))
    gam = gamma_cone(P)
    for g in ups.generators:
        if not gam.contains_exact(g):
            raise AssertionError("upsilon generator outside gamma cone")
    for g in gam.generators:
        if not ups.contains_exact(g):
            raise AssertionError("gamma generator outside upsilon cone")
    return ups


def omega(a_log: Vec, w_orbit, gamma: Cone) -> PolyhedralSet:
    """conv(orbit of a_log) + gamma.  Pass the orbit as an iterable of points
    (or a WeylGroup-producing caller can use rootsys.weyl_orbit first)."""
    pts = tuple(sorted(set(map(ex.vec, w_orbit)))) if w_orbit else (ex.vec(a_log),)
    return PolyhedralSet(vertices=pts, cone=gamma)


def gk_cone(P: PositiveSystem, Q: PositiveSystem) -> Cone:
    """Gamma_a over Sigma(P) intersect Sigma(Q-bar): unprojected coroots."""
    inter = sorted(P.positive & Q.negative)
    return gamma_a(inter, P.datum.gram)


# --- serialization ---------------------------------------------------------

def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _frac_parse(s: str) -> Fraction:
    return Fraction(s)


def cone_to_dict(c: Cone) -> dict:
    return {"ambient": c.dim_ambient,
            "generators": [[_frac_str(x) for x in g] for g in c.generators],
            "inequalities": [{"normal": [_frac_str(x) for x in a],
                              "rhs": _frac_str(r)} for a, r in c.hrep]}


def set_to_dict(s: PolyhedralSet) -> dict:
    return {"vertices": [[_frac_str(x) for x in v] for v in s.vertices],
            "cone": cone_to_dict(s.cone),
            "inequalities": [{"normal": [_frac_str(x) for x in a],
                              "rhs": _frac_str(r)} for a, r in s.hrep]}


def cone_from_dict(d: dict) -> Cone:
    return Cone(tuple(tuple(_frac_parse(x) for x in g) for g in d["generators"]),
                ambient=d.get("ambient"))


def set_from_dict(d: dict) -> PolyhedralSet:
    return PolyhedralSet(
        vertices=tuple(tuple(_frac_parse(x) for x in v) for v in d["vertices"]),
        cone=cone_from_dict(d["cone"]))
