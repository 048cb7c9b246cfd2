"""Monte Carlo verification runs and report emission.

Each check draws seeded samples on a preset realization, tests the predicted
polyhedral geometry within a tolerance, and records coverage metrics plus the
first few failing witnesses.  Reports serialize deterministically: identical
configuration gives byte-identical JSON and CSV output, so wall-clock runtime
is kept on the in-memory report only.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.linalg import expm

from . import exactlin as ex
from .critical import (F, NotRegular, critical_value, ensure_regular, hessian,
                       kernel_dim, omega_X, predicted_signature, sample_H_X,
                       sample_NPH, transversal_signature, vanishing_patterns)
from .matrixgrp import (Realization, a_matrix, h_pq, iwasawa, realization,
                        root_entry, sample_H)
from .parabolic import (PositiveSystem, all_positive_systems, from_chamber,
                        sigma_classification)
from .polyhedra import (Cone, PolyhedralSet, contains_line, coroot, gamma_aq,
                        gamma_cone, gk_cone, is_pointed, omega,
                        pointedness_certificate)
from .rootsys import weyl_orbit


class ConfigError(ValueError):
    pass


class IoError(OSError):
    pass


CHECK_NAMES = frozenset({"main", "kostant", "gk", "hessian", "critical_image",
                         "inclusion_cone", "no_line", "limits"})
FORMATS = ("json", "csv", "svg")

_DEFAULT_A_LOG = {
    "kostant_sl2": ("1", "-1"),
    "sl2_so11": ("1", "-1"),
    "sl3_so21": ("2", "1", "-3"),
    "group_sl2": ("1", "-1", "-1", "1"),
}

# per-preset coverage thresholds: (vertex distance, generator angle in rad)
_COVERAGE = {
    "kostant_sl2": (1e-2, 0.05),
    "sl2_so11": (1e-2, 0.05),
    "sl3_so21": (1e-2, 0.05),
    "group_sl2": (1e-2, 0.05),
}

MAX_WITNESSES = 10
MIN_DISPLACEMENT = 0.5


def _rat_tuple(xs) -> tuple[str, ...]:
    try:
        return tuple(str(Fraction(str(x))) for x in xs)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"not a rational vector: {xs!r}") from e


@dataclass(frozen=True)
class VerificationConfig:
    preset: str
    chamber: tuple[str, ...] | None = None
    a_log: tuple[str, ...] | None = None
    samples: int = 2000
    radii: tuple[float, ...] = (1.0, 2.0, 4.0)
    tol: float = 1e-7
    seed: int = 0
    checks: frozenset[str] = frozenset({"main"})
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.samples <= 0:
            raise ConfigError("sample count must be positive")
        if not self.radii or any(r <= 0 for r in self.radii):
            raise ConfigError("radii must be positive")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ConfigError("radii must be strictly increasing")
        if self.tol <= 0:
            raise ConfigError("tolerance must be positive")
        bad = self.checks - CHECK_NAMES
        if bad:
            raise ConfigError(f"unknown checks: {sorted(bad)}")
        if not self.checks:
            raise ConfigError("empty check set")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")

    def a_log_exact(self) -> tuple[Fraction, ...]:
        src = self.a_log if self.a_log is not None else _DEFAULT_A_LOG[self.preset]
        return tuple(Fraction(s) for s in src)

    def positive_system(self, rz: Realization) -> PositiveSystem:
        if self.chamber is None:
            return rz.base_parabolic
        try:
            return from_chamber(rz.datum, tuple(Fraction(s) for s in self.chamber))
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def to_dict(self) -> dict:
        return {
            "preset": self.preset,
            "chamber": list(self.chamber) if self.chamber else None,
            "a_log": list(self.a_log) if self.a_log else list(_DEFAULT_A_LOG[self.preset]),
            "samples": self.samples,
            "radii": list(self.radii),
            "tol": self.tol,
            "seed": self.seed,
            "checks": sorted(self.checks),
            "format": self.format,
        }


_CONFIG_KEYS = {"preset", "chamber", "a_log", "samples", "radii", "tol",
                "seed", "checks", "out", "format"}


def config_from_mapping(data: Mapping, **overrides) -> VerificationConfig:
    """Build a config from a JSON-style mapping; keyword overrides win."""
    merged = dict(data)
    unknown = set(merged) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for k, v in overrides.items():
        if v is not None:
            merged[k] = v
    if "preset" not in merged:
        raise ConfigError("a preset name is required")
    preset = merged["preset"]
    if preset not in _DEFAULT_A_LOG:
        raise ConfigError(f"unknown preset {preset!r}; "
                          f"choices: {sorted(_DEFAULT_A_LOG)}")
    kw: dict = {"preset": preset}
    if merged.get("chamber") is not None:
        kw["chamber"] = _rat_tuple(merged["chamber"])
    if merged.get("a_log") is not None:
        kw["a_log"] = _rat_tuple(merged["a_log"])
    if merged.get("samples") is not None:
        try:
            kw["samples"] = int(merged["samples"])
        except (TypeError, ValueError) as e:
            raise ConfigError("samples must be an integer") from e
    if merged.get("radii") is not None:
        try:
            kw["radii"] = tuple(float(r) for r in merged["radii"])
        except (TypeError, ValueError) as e:
            raise ConfigError("radii must be numbers") from e
    if merged.get("tol") is not None:
        kw["tol"] = float(merged["tol"])
    if merged.get("seed") is not None:
        kw["seed"] = int(merged["seed"])
    if merged.get("checks") is not None:
        cs = merged["checks"]
        if isinstance(cs, str):
            cs = [c.strip() for c in cs.split(",") if c.strip()]
        kw["checks"] = frozenset(cs)
    if merged.get("out") is not None:
        kw["out"] = str(merged["out"])
    if merged.get("format") is not None:
        kw["format"] = str(merged["format"])
    return VerificationConfig(**kw)


@dataclass
class CheckResult:
    name: str
    passed: bool
    count: int = 0
    worst_slack: float | None = None
    vertex_distances: tuple[float, ...] | None = None
    generator_gaps: tuple[float, ...] | None = None
    witnesses: tuple[tuple, ...] = ()
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "count": self.count,
            "worst_slack": self.worst_slack,
            "vertex_distances": list(self.vertex_distances)
            if self.vertex_distances is not None else None,
            "generator_gaps": list(self.generator_gaps)
            if self.generator_gaps is not None else None,
            "witnesses": [list(w) for w in self.witnesses],
            "detail": self.detail,
        }


@dataclass
class Report:
    config: dict
    results: tuple[CheckResult, ...]
    runtime: float = 0.0                      # excluded from serialization
    samples: np.ndarray | None = None         # main-check values, for csv/svg
    geometry: dict | None = None              # vertices/generators, for svg

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "passed": self.passed,
            "sample_count": 0 if self.samples is None else int(len(self.samples)),
            "checks": [r.to_dict() for r in self.results],
        }


# --- shared numeric helpers -------------------------------------------------

def _hrep_arrays(obj) -> tuple[np.ndarray, np.ndarray]:
    rows = obj.hrep
    n = len(obj.vertices[0]) if isinstance(obj, PolyhedralSet) else obj.dim_ambient
    if not rows:
        return np.zeros((0, n)), np.zeros(0)
    A = np.array([[float(c) for c in a] for a, _ in rows])
    b = np.array([float(r) for _, r in rows])
    return A, b


def _float_rows(vs) -> np.ndarray:
    return np.array([[float(c) for c in v] for v in vs])


class _Coverage:
    """Cumulative vertex-distance and generator-angle tracking."""

    def __init__(self, verts: np.ndarray, gens: np.ndarray):
        self.verts = verts
        self.gens = gens
        self.vdist = np.full(len(verts), np.inf)
        self.gaps = np.full(len(gens), np.inf)

    def update(self, vals: np.ndarray) -> None:
        d = vals[:, None, :] - self.verts[None, :, :]
        dist = np.linalg.norm(d, axis=-1)
        self.vdist = np.minimum(self.vdist, dist.min(axis=0))
        if len(self.gens) == 0:
            return
        pick = np.argmin(dist, axis=1)
        disp = vals - self.verts[pick]
        nd = np.linalg.norm(disp, axis=-1)
        ok = nd >= MIN_DISPLACEMENT
        if not ok.any():
            return
        disp = disp[ok]
        nd = nd[ok]
        for i, g in enumerate(self.gens):
            gu = g / np.linalg.norm(g)
            cos = np.clip((disp @ gu) / nd, -1.0, 1.0)
            self.gaps[i] = min(self.gaps[i], float(np.arccos(cos).min()))


def _min_slack(A: np.ndarray, b: np.ndarray, vals: np.ndarray) -> np.ndarray:
    if len(A) == 0:
        return np.zeros(len(vals))
    return (vals @ A.T - b[None, :]).min(axis=1)


def _h_probes(rz: Realization, P: PositiveSystem, radii) -> np.ndarray:
    """Deterministic probes: Weyl representatives, center components, and
    rank-one rays from every vertex along every cone-generator root."""
    mats = [np.eye(rz.dim)]
    ray_dirs = []
    cls = sigma_classification(P)
    for alpha in sorted(cls.minus_part):
        i, j = root_entry(alpha)
        E = np.zeros((rz.dim, rz.dim))
        E[i, j] = 1.0
        ray_dirs.append(E + rz.sigma_alg(E))
    for xw in rz.weyl_reps.values():
        for z in rz.z_reps:
            mats.append(xw @ z)
        for U in ray_dirs:
            for r in radii:
                mats.append(xw @ expm(r * U))
                mats.append(xw @ expm(-r * U))
    return np.stack(mats)


# --- individual checks ------------------------------------------------------

def _require_regular(rz: Realization, cfg: VerificationConfig):
    try:
        return ensure_regular(rz, cfg.a_log_exact())
    except NotRegular as e:
        raise ConfigError(f"a_log is singular ({e}); use the limits check") from e
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _check_main(rz: Realization, P: PositiveSystem, cfg: VerificationConfig
                ) -> tuple[CheckResult, np.ndarray, dict]:
    a_exact = _require_regular(rz, cfg)
    orbit = weyl_orbit(rz.small_weyl, a_exact)
    gamma = gamma_cone(P)
    om = omega(a_exact, orbit, gamma)
    A, b = _hrep_arrays(om)
    verts = _float_rows(om.vertices)
    gens = _float_rows(om.cone.generators) if om.cone.generators else np.zeros((0, rz.dim))
    cover = _Coverage(verts, gens)
    a = a_matrix(np.exp(_float_rows([a_exact])[0]))

    witnesses: list[tuple] = []
    worst = np.inf
    count = 0
    history = []
    collected = []

    def feed(hs: np.ndarray) -> None:
        nonlocal worst, count
        vals = h_pq(rz, a @ hs, P)
        collected.append(vals)
        count += len(vals)
        sl = _min_slack(A, b, vals)
        worst = min(worst, float(sl.min()))
        for i in np.nonzero(sl < -cfg.tol)[0]:
            if len(witnesses) < MAX_WITNESSES:
                witnesses.append(tuple(round(float(x), 12) for x in vals[i]))
        cover.update(vals)

    feed(_h_probes(rz, P, cfg.radii))
    for k, r in enumerate(cfg.radii):
        feed(sample_H(rz, r, cfg.samples, cfg.seed + 7919 * k))
        history.append({"radius": r,
                        "max_vertex_distance": float(cover.vdist.max()),
                        "max_generator_gap":
                            float(cover.gaps.max()) if len(gens) else 0.0})

    v_tol, g_tol = _COVERAGE[rz.name]
    passed = (not witnesses and worst >= -cfg.tol
              and bool(cover.vdist.max() <= v_tol)
              and (len(gens) == 0 or bool(cover.gaps.max() <= g_tol)))
    geometry = {"vertices": verts.tolist(), "generators": gens.tolist()}
    res = CheckResult(
        name="main", passed=passed, count=count, worst_slack=float(worst),
        vertex_distances=tuple(float(x) for x in cover.vdist),
        generator_gaps=tuple(float(x) for x in cover.gaps) if len(gens) else (),
        witnesses=tuple(witnesses),
        detail={"radius_history": history, "coverage_thresholds": [v_tol, g_tol]})
    return res, np.concatenate(collected, axis=0), geometry


def _check_kostant(rz: Realization, P: PositiveSystem, cfg: VerificationConfig
                   ) -> CheckResult:
    if rz.name != "kostant_sl2":
        raise ConfigError("the kostant check runs on the kostant_sl2 preset")
    a_exact = _require_regular(rz, cfg)
    t1, t2 = float(a_exact[0]), float(a_exact[1])
    phi = np.linspace(0.0, np.pi / 2, 1000)
    ks = np.zeros((len(phi), 2, 2))
    ks[:, 0, 0] = np.cos(phi)
    ks[:, 0, 1] = -np.sin(phi)
    ks[:, 1, 0] = np.sin(phi)
    ks[:, 1, 1] = np.cos(phi)
    a = a_matrix(np.exp(np.array([t1, t2])))
    vals = h_pq(rz, a @ ks)[:, 0]
    closed = 0.5 * np.log(np.exp(2 * t1) * np.cos(phi) ** 2
                          + np.exp(2 * t2) * np.sin(phi) ** 2)
    dev = float(np.abs(vals - closed).max())
    end_dev = max(abs(float(vals[0]) - t1), abs(float(vals[-1]) - t2))
    lo, hi = min(t1, t2), max(t1, t2)
    inside = float(max(np.max(vals) - hi, lo - np.min(vals), 0.0))
    passed = dev <= 1e-12 and end_dev <= 1e-12 and inside <= 1e-12
    return CheckResult(name="kostant", passed=passed, count=len(phi),
                       worst_slack=-inside,
                       detail={"max_closed_form_deviation": dev,
                               "endpoint_deviation": end_dev})


def _check_no_line(rz: Realization, P: PositiveSystem, cfg: VerificationConfig
                   ) -> CheckResult:
    gamma = gamma_cone(P)
    pointed = is_pointed(gamma)
    line = contains_line(gamma)
    cert = pointedness_certificate(gamma) if pointed else None
    return CheckResult(
        name="no_line", passed=bool(pointed and not line),
        count=len(gamma.generators),
        detail={"pointed": bool(pointed), "contains_line": bool(line),
                "certificate": [str(c) for c in cert] if cert is not None else None})


def _check_inclusion_cone(rz: Realization, P: PositiveSystem,
                          cfg: VerificationConfig) -> CheckResult:
    cls = sigma_classification(P)
    cone = gamma_aq(sorted(cls.sigmatheta_part), rz.datum) \
        if cls.sigmatheta_part else Cone((), ambient=rz.dim)
    A, b = _hrep_arrays(cone)
    worst = np.inf
    witnesses: list[tuple] = []
    count = 0
    for k, r in enumerate(cfg.radii):
        hs = sample_H(rz, r, cfg.samples, cfg.seed + 104729 * (k + 1))
        vals = h_pq(rz, hs, P)
        count += len(vals)
        sl = _min_slack(A, b, vals)
        worst = min(worst, float(sl.min()))
        for i in np.nonzero(sl < -cfg.tol)[0]:
            if len(witnesses) < MAX_WITNESSES:
                witnesses.append(tuple(round(float(x), 12) for x in vals[i]))
    return CheckResult(name="inclusion_cone", passed=not witnesses,
                       count=count, worst_slack=float(worst),
                       witnesses=tuple(witnesses))


def _check_hessian(rz: Realization, P: PositiveSystem, cfg: VerificationConfig
                   ) -> CheckResult:
    a_exact = _require_regular(rz, cfg)
    rng = np.random.Generator(np.random.PCG64(cfg.seed + 31))
    aq = _float_rows(rz.datum.aq_basis)
    worst_rel = 0.0
    witnesses: list[tuple] = []
    count = 0
    for _ in range(cfg.samples):
        coords = [Fraction(c).limit_denominator(40)
                  for c in rng.normal(size=len(aq))]
        X = ex.zeros(rz.dim)
        for c, bvec in zip(coords, rz.datum.aq_basis):
            X = ex.add(X, ex.scale(c, bvec))
        kd = kernel_dim(rz, X, P)
        for w in rz.small_weyl.elements:
            count += 1
            rep = hessian(rz, a_exact, X, w, P)
            scale = max(np.abs(rep.analytic_form).max(), 1.0)
            rel = float(np.abs(rep.numeric_form - rep.analytic_form).max() / scale)
            worst_rel = max(worst_rel, rel)
            n_plus, n_zero, n_minus = rep.signature
            posdef, certs = predicted_signature(rz, a_exact, X, w, P)
            tsig = transversal_signature(rz, rep, X, P)
            ok = (rel <= 1e-6 and n_zero == kd
                  and (tsig[2] == 0) == posdef and tsig[1] == 0
                  and posdef == all(c["positive"] for c in certs))
            if not ok and len(witnesses) < MAX_WITNESSES:
                witnesses.append((tuple(str(c) for c in X), rel,
                                  rep.signature, (kd,), posdef))
    return CheckResult(name="hessian", passed=not witnesses, count=count,
                       worst_slack=-worst_rel,
                       detail={"worst_relative_error": worst_rel})


def _check_critical_image(rz: Realization, P: PositiveSystem,
                          cfg: VerificationConfig) -> CheckResult:
    a_exact = _require_regular(rz, cfg)
    pats = vanishing_patterns(rz, per_pattern=10, seed=cfg.seed + 47)
    n_per = max(8, cfg.samples // 50)
    radius = cfg.radii[-1]
    a = a_matrix(np.exp(_float_rows([a_exact])[0]))
    worst = np.inf
    witnesses: list[tuple] = []
    count = 0
    exact_fail = 0
    for pi, (S, wits) in enumerate(pats):
        for xi, X in enumerate(wits):
            oms = omega_X(rz, a_exact, X, P)
            Xf = _float_rows([X])[0]
            for wi, (w, om) in enumerate(sorted(oms.items())):
                A, b = _hrep_arrays(om)
                xw = rz.weyl_reps[w]
                seed = cfg.seed + 1009 * pi + 101 * xi + wi
                hx = sample_H_X(rz, X, radius, n_per, seed)
                nh = sample_NPH(rz, P, radius, n_per, seed + 1)
                vals = h_pq(rz, a @ xw @ hx @ nh, P)
                count += len(vals)
                sl = _min_slack(A, b, vals)
                worst = min(worst, float(sl.min()))
                for i in np.nonzero(sl < -cfg.tol)[0]:
                    if len(witnesses) < MAX_WITNESSES:
                        witnesses.append(tuple(round(float(x), 12)
                                               for x in vals[i]))
                # combinatorial layer: the critical value is the exact level
                # of <X, .> on the predicted image
                lv = critical_value(rz, a_exact, X, w)
                gX = ex.mat_vec(rz.datum.gram, X)
                if min(ex.dot(gX, u) for u in om.vertices) != lv:
                    exact_fail += 1
                if any(ex.dot(gX, g) < 0 for g in om.cone.generators):
                    exact_fail += 1
                fv = float(F(rz, a_exact, Xf, xw, P))
                if abs(fv - float(lv)) > 1e-8 * max(1.0, abs(float(lv))):
                    exact_fail += 1
    passed = not witnesses and exact_fail == 0
    return CheckResult(name="critical_image", passed=passed, count=count,
                       worst_slack=float(worst), witnesses=tuple(witnesses),
                       detail={"patterns": len(pats),
                               "exact_level_failures": exact_fail})


def _check_gk(rz: Realization, cfg: VerificationConfig) -> CheckResult:
    systems = all_positive_systems(rz.datum)
    rng = np.random.Generator(np.random.PCG64(cfg.seed + 59))
    worst = np.inf
    witnesses: list[tuple] = []
    count = 0
    closed_dev = 0.0
    gap_fail = 0
    for P in systems:
        for Q in systems:
            support = sorted(Q.positive & P.negative)
            cone = gk_cone(P, Q)
            A, b = _hrep_arrays(cone)
            gens = _float_rows(cone.generators) if cone.generators \
                else np.zeros((0, rz.dim))
            gaps = np.full(len(gens), np.inf)

            def feed(xs: np.ndarray) -> None:
                nonlocal worst, count
                vals = iwasawa(rz, xs, P).H
                count += len(vals)
                sl = _min_slack(A, b, vals)
                worst = min(worst, float(sl.min()))
                for i in np.nonzero(sl < -cfg.tol)[0]:
                    if len(witnesses) < MAX_WITNESSES:
                        witnesses.append(tuple(round(float(x), 12)
                                               for x in vals[i]))
                nd = np.linalg.norm(vals, axis=-1)
                ok = nd >= MIN_DISPLACEMENT
                if ok.any():
                    for i, g in enumerate(gens):
                        gu = g / np.linalg.norm(g)
                        cos = np.clip((vals[ok] @ gu) / nd[ok], -1.0, 1.0)
                        gaps[i] = min(gaps[i], float(np.arccos(cos).min()))

            if not support:
                feed(np.eye(rz.dim)[None])
                continue
            basis = []
            for alpha in support:
                i, j = root_entry(alpha)
                E = np.zeros((rz.dim, rz.dim))
                E[i, j] = 1.0
                basis.append(E)
            basis = np.stack(basis)
            # rank-one probes hit each generator direction exactly
            for E in basis:
                for s in (1.0, 3.0):
                    feed(expm(s * E)[None])
            n = max(1, cfg.samples // max(1, len(systems) ** 2))
            coef = rng.normal(0.0, 1.0, size=(n, len(basis)))
            feed(expm(np.einsum("ck,kij->cij", coef * cfg.radii[-1] / 2, basis)))
            if len(gens) and gaps.max() > 0.05:
                gap_fail += 1
            # rank-one closed form, exact in the embedded A1
            for E, alpha in zip(basis, support):
                x = 1.7
                val = iwasawa(rz, np.eye(rz.dim) + x * E, P).H
                h_neg = coroot(ex.neg(alpha), rz.datum.gram).h_alpha
                want = 0.5 * np.log(1 + x * x) * _float_rows([h_neg])[0]
                closed_dev = max(closed_dev, float(np.abs(val - want).max()))
    passed = (not witnesses and gap_fail == 0 and closed_dev <= 1e-12)
    return CheckResult(name="gk", passed=passed, count=count,
                       worst_slack=float(worst), witnesses=tuple(witnesses),
                       detail={"closed_form_deviation": closed_dev,
                               "pairs": len(systems) ** 2,
                               "generator_gap_failures": gap_fail})


def _check_limits(rz: Realization, P: PositiveSystem, cfg: VerificationConfig
                  ) -> CheckResult:
    a_exact = cfg.a_log_exact()
    if ex.mat_vec(rz.datum.q_projector, a_exact) != a_exact:
        raise ConfigError("base point must lie in a_q")
    # a regular rational direction in a_q
    dirv = None
    for p in (97, 991, 9973):
        cand = ex.zeros(rz.dim)
        for k, bvec in enumerate(rz.datum.aq_basis):
            cand = ex.add(cand, ex.scale(Fraction(p + k + 1, p), bvec))
        if all(ex.dot(lam, cand) != 0 for lam in rz.restricted.roots_q):
            dirv = cand
            break
    if dirv is None:
        raise ConfigError("no regular direction found")
    steps = []
    for j in range(1, 5):
        t = Fraction(1, 4 ** j)
        aj = ex.add(a_exact, ex.scale(t, dirv))
        if all(ex.dot(lam, aj) != 0 for lam in rz.restricted.roots_q):
            steps.append(aj)
    worst = np.inf
    witnesses: list[tuple] = []
    count = 0
    gamma = gamma_cone(P)
    n_bulk = max(16, cfg.samples // 4)
    for idx, point in enumerate(steps + [a_exact]):
        orbit = weyl_orbit(rz.small_weyl, point)
        om = omega(point, orbit, gamma)
        A, b = _hrep_arrays(om)
        a = a_matrix(np.exp(_float_rows([point])[0]))
        hs = np.concatenate([
            _h_probes(rz, P, cfg.radii[-1:]),
            sample_H(rz, cfg.radii[-1], n_bulk, cfg.seed + 733 * idx)])
        vals = h_pq(rz, a @ hs, P)
        count += len(vals)
        sl = _min_slack(A, b, vals)
        worst = min(worst, float(sl.min()))
        for i in np.nonzero(sl < -cfg.tol)[0]:
            if len(witnesses) < MAX_WITNESSES:
                witnesses.append(tuple(round(float(x), 12) for x in vals[i]))
    return CheckResult(name="limits", passed=not witnesses, count=count,
                       worst_slack=float(worst), witnesses=tuple(witnesses),
                       detail={"sequence_length": len(steps)})


# --- entry points -----------------------------------------------------------

def verify_main(cfg: VerificationConfig) -> Report:
    """Main-theorem inclusion and coverage, plus the coupled exact checks."""
    t0 = time.perf_counter()
    rz = realization(cfg.preset)
    P = cfg.positive_system(rz)
    wanted = cfg.checks & {"main", "kostant", "no_line", "inclusion_cone"} \
        or {"main"}
    results = []
    samples = None
    geometry = None
    if "main" in wanted:
        res, samples, geometry = _check_main(rz, P, cfg)
        results.append(res)
    if "kostant" in wanted:
        results.append(_check_kostant(rz, P, cfg))
    if "no_line" in wanted:
        results.append(_check_no_line(rz, P, cfg))
    if "inclusion_cone" in wanted:
        results.append(_check_inclusion_cone(rz, P, cfg))
    return Report(config=cfg.to_dict(), results=tuple(results),
                  runtime=time.perf_counter() - t0,
                  samples=samples, geometry=geometry)


def verify_limits(cfg: VerificationConfig) -> Report:
    t0 = time.perf_counter()
    rz = realization(cfg.preset)
    P = cfg.positive_system(rz)
    res = _check_limits(rz, P, cfg)
    return Report(config=cfg.to_dict(), results=(res,),
                  runtime=time.perf_counter() - t0)


def verify_gk(cfg: VerificationConfig) -> Report:
    t0 = time.perf_counter()
    rz = realization(cfg.preset)
    res = _check_gk(rz, cfg)
    return Report(config=cfg.to_dict(), results=(res,),
                  runtime=time.perf_counter() - t0)


def run(cfg: VerificationConfig) -> Report:
    """Dispatch every configured check and merge into one report."""
    t0 = time.perf_counter()
    rz = realization(cfg.preset)
    P = cfg.positive_system(rz)
    results: list[CheckResult] = []
    samples = None
    geometry = None
    if "main" in cfg.checks:
        res, samples, geometry = _check_main(rz, P, cfg)
        results.append(res)
    if "kostant" in cfg.checks:
        results.append(_check_kostant(rz, P, cfg))
    if "no_line" in cfg.checks:
        results.append(_check_no_line(rz, P, cfg))
    if "inclusion_cone" in cfg.checks:
        results.append(_check_inclusion_cone(rz, P, cfg))
    if "gk" in cfg.checks:
        results.append(_check_gk(rz, cfg))
    if "hessian" in cfg.checks:
        results.append(_check_hessian(rz, P, cfg))
    if "critical_image" in cfg.checks:
        results.append(_check_critical_image(rz, P, cfg))
    if "limits" in cfg.checks:
        results.append(_check_limits(rz, P, cfg))
    return Report(config=cfg.to_dict(), results=tuple(results),
                  runtime=time.perf_counter() - t0,
                  samples=samples, geometry=geometry)


# --- emission ---------------------------------------------------------------

def _finite(obj):
    if isinstance(obj, float):
        return obj if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def report_json(report: Report) -> bytes:
    payload = _finite(report.to_dict())
    return (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode()


def report_csv(report: Report) -> bytes:
    lines = []
    if report.samples is not None and len(report.samples):
        n = report.samples.shape[1]
        lines.append(",".join(f"x{i}" for i in range(n)))
        for row in report.samples:
            lines.append(",".join(f"{v:.12g}" for v in row))
    else:
        lines.append("x0")
    return ("\n".join(lines) + "\n").encode()


def _project_2d(points: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return points @ basis.T


def report_svg(report: Report) -> bytes:
    """2D section of the predicted set with a sample scatter."""
    geom = report.geometry or {"vertices": [], "generators": []}
    verts = np.array(geom["vertices"]) if geom["vertices"] else np.zeros((0, 2))
    gens = np.array(geom["generators"]) if geom["generators"] else np.zeros((0, verts.shape[1] if len(verts) else 2))
    pts = report.samples if report.samples is not None else np.zeros((0, verts.shape[1] if len(verts) else 2))
    amb = verts.shape[1] if len(verts) else (pts.shape[1] if len(pts) else 2)
    src = np.concatenate([verts, pts], axis=0) if len(verts) or len(pts) \
        else np.zeros((0, amb))
    # orthonormal 2D frame spanning the data
    if len(src) > 1:
        centered = src - src.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        frame = vt[:2]
        if frame.shape[0] < 2:
            frame = np.vstack([frame, np.zeros(amb)])
    else:
        frame = np.zeros((2, amb))
        frame[0, 0] = 1.0
        if amb > 1:
            frame[1, 1] = 1.0
    V2 = _project_2d(verts, frame) if len(verts) else np.zeros((0, 2))
    P2 = _project_2d(pts, frame) if len(pts) else np.zeros((0, 2))
    G2 = _project_2d(gens, frame) if len(gens) else np.zeros((0, 2))
    allp = np.concatenate([V2, P2], axis=0) if len(V2) or len(P2) else np.zeros((1, 2))
    lo = allp.min(axis=0) - 1.0
    hi = allp.max(axis=0) + 1.0
    span = np.maximum(hi - lo, 1e-6)
    W = 640.0
    Hh = 480.0
    sc = min((W - 40) / span[0], (Hh - 40) / span[1])

    def sx(p):
        return 20.0 + (p[0] - lo[0]) * sc

    def sy(p):
        return Hh - 20.0 - (p[1] - lo[1]) * sc

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" '
             f'height="{Hh:.0f}" viewBox="0 0 {W:.0f} {Hh:.0f}">',
             f'<rect width="{W:.0f}" height="{Hh:.0f}" fill="#ffffff"/>']
    diag = float(np.hypot(W, Hh))
    # cone rays from each vertex
    for v in V2:
        for g in G2:
            ng = float(np.linalg.norm(g))
            if ng < 1e-12:
                continue
            end = v + g / ng * (diag / sc)
            parts.append(f'<line x1="{sx(v):.4f}" y1="{sy(v):.4f}" '
                         f'x2="{sx(end):.4f}" y2="{sy(end):.4f}" '
                         f'stroke="#9db8d9" stroke-width="1"/>')
    if len(V2) >= 2:
        order = np.argsort(np.arctan2(*(V2 - V2.mean(axis=0)).T[::-1]))
        path = " ".join(f"{'M' if i == 0 else 'L'} {sx(V2[j]):.4f} {sy(V2[j]):.4f}"
                        for i, j in enumerate(order))
        parts.append(f'<path d="{path} Z" fill="#dbe7f5" stroke="#4a6da7" '
                     f'stroke-width="1.5"/>')
    stride = max(1, len(P2) // 3000)
    for p in P2[::stride]:
        parts.append(f'<circle cx="{sx(p):.4f}" cy="{sy(p):.4f}" r="1.5" '
                     f'fill="#c0392b" fill-opacity="0.45"/>')
    for v in V2:
        parts.append(f'<circle cx="{sx(v):.4f}" cy="{sy(v):.4f}" r="4" '
                     f'fill="#1a3a6b"/>')
    label = ",".join(r.name for r in report.results) or "report"
    state = "pass" if report.passed else "FAIL"
    parts.append(f'<text x="20" y="{Hh - 4:.0f}" font-family="monospace" '
                 f'font-size="12" fill="#333333">{label}: {state}, '
                 f'{0 if report.samples is None else len(report.samples)} samples</text>')
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode()


def emit_report(report: Report, fmt: str | None = None,
                out: str | None = None) -> Path:
    fmt = fmt or report.config.get("format", "json")
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    if out is None:
        out = f"orbitcone-report.{fmt}"
    data = {"json": report_json, "csv": report_csv, "svg": report_svg}[fmt](report)
    path = Path(out)
    try:
        path.write_bytes(data)
    except OSError as e:
        raise IoError(f"cannot write report to {out}: {e}") from e
    return path
