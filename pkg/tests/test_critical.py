from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from orbitcone import exactlin as ex
from orbitcone.critical import (F, NotALocalMin, NotRegular, critical_reps,
                                critical_value, ensure_regular, grad_F,
                                hessian, kernel_dim, local_min_halfspace_check,
                                omega_X, predicted_signature, sample_H_X,
                                sample_NPH, transversal_signature,
                                vanishing_patterns)
from orbitcone.matrixgrp import a_matrix, sample_H
from orbitcone.parabolic import plus_minus
from orbitcone.polyhedra import gamma_aq, omega
from orbitcone.rootsys import weyl_orbit

A_LOGS = {
    "kostant_sl2": (1, -1),
    "sl2_so11": (1, -1),
    "sl3_so21": (2, 1, -3),
    "group_sl2": (1, -1, -1, 1),
}


def _a_log(rz):
    return tuple(Fraction(c) for c in A_LOGS[rz.name])


def _identity_w(rz):
    eye = ex.identity(rz.dim)
    return next(w for w in rz.small_weyl.elements if w == eye)


def test_ensure_regular(rz):
    a = ensure_regular(rz, _a_log(rz))
    assert all(isinstance(c, Fraction) for c in a)


def test_ensure_regular_rejects_wall(rz_sl3):
    with pytest.raises(NotRegular):
        ensure_regular(rz_sl3, (1, 1, -2))
    with pytest.raises(NotRegular):
        critical_reps(rz_sl3, (1, 1, -2))


def test_ensure_regular_rejects_off_aq(rz_group):
    # sigma-fixed direction, projects to zero
    with pytest.raises(ValueError):
        ensure_regular(rz_group, (1, -1, 1, -1))


def test_reps_are_critical_points(rz):
    a_log = _a_log(rz)
    X = _a_log(rz)
    for w, xw in critical_reps(rz, a_log):
        val = float(critical_value(rz, a_log, X, w))
        assert abs(float(F(rz, a_log, X, xw)) - val) < 1e-9
        g = grad_F(rz, a_log, X, xw)
        assert np.abs(g).max() < 1e-8


def test_grad_matches_finite_differences(rz):
    a_log = _a_log(rz)
    X = _a_log(rz)
    hs = sample_H(rz, 0.8, 4, seed=11)
    basis = np.stack(rz.h_basis)
    g = grad_F(rz, a_log, X, hs)

    def fd(eps):
        plus = F(rz, a_log, X, hs[:, None] @ expm(eps * basis)[None, :])
        minus = F(rz, a_log, X, hs[:, None] @ expm(-eps * basis)[None, :])
        return (plus - minus) / (2 * eps)

    d1, d2 = fd(1e-3), fd(5e-4)
    rich = (4.0 * d2 - d1) / 3.0
    scale = max(1.0, np.abs(g).max())
    assert np.abs(g - rich).max() / scale < 1e-7


def _random_exact_X(rz, rng):
    coef = [Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4)))
            for _ in rz.datum.aq_basis]
    X = ex.zeros(rz.dim)
    for c, b in zip(coef, rz.datum.aq_basis):
        X = ex.add(X, ex.scale(c, b))
    return X


def test_hessian_agreement_and_kernel(rz):
    a_log = _a_log(rz)
    rng = np.random.Generator(np.random.PCG64(29))
    for _ in range(3):
        X = _random_exact_X(rz, rng)
        kd = kernel_dim(rz, X)
        for w in rz.small_weyl.elements:
            rep = hessian(rz, a_log, X, w)
            scale = np.maximum(np.abs(rep.analytic_form), 1.0)
            rel = np.abs(rep.numeric_form - rep.analytic_form) / scale
            assert rel.max() < 1e-6
            assert rep.signature[1] == kd
            tsig = transversal_signature(rz, rep, X)
            posdef, certs = predicted_signature(rz, a_log, X, w)
            assert tsig[1] == 0
            assert (tsig[2] == 0) == posdef
            assert posdef == all(c["positive"] for c in certs)


def test_predicted_certificates_cover_transversal(rz):
    a_log = _a_log(rz)
    X = _a_log(rz)
    for w in rz.small_weyl.elements:
        _, certs = predicted_signature(rz, a_log, X, w)
        total = sum(c["transversal_dim"] for c in certs)
        assert total == len(rz.h_basis) - kernel_dim(rz, X)
        for c in certs:
            assert c["case"] in ("a", "b.1", "b.2.1", "b.2.2")
            assert len(c["eigenvalues"]) <= c["transversal_dim"]


def test_so11_hessian_closed_form(rz_so11):
    w = _identity_w(rz_so11)
    for t in (0.3, 1.0):
        a_log = (Fraction(t).limit_denominator(10),
                 -Fraction(t).limit_denominator(10))
        tf = float(a_log[0])
        expected = 8.0 * (1.0 + np.exp(-4.0 * tf))
        rep = hessian(rz_so11, a_log, (1, -1), w)
        assert abs(rep.analytic_form[0, 0] - expected) < 1e-9
        assert abs(rep.numeric_form[0, 0] - expected) < 1e-6
        assert rep.signature == (1, 0, 0)


def test_kostant_hessian_closed_form(rz_kostant):
    eye = ex.identity(2)
    t = 0.7
    a_log = (Fraction(7, 10), Fraction(-7, 10))
    for x in (1.5, -0.8):
        X = (Fraction(x).limit_denominator(10),
             -Fraction(x).limit_denominator(10))
        for w in rz_kostant.small_weyl.elements:
            sign = 1.0 if w == eye else -1.0
            expected = 8.0 * x * (np.exp(-4.0 * sign * t) - 1.0)
            rep = hessian(rz_kostant, a_log, X, w)
            scale = max(1.0, abs(expected))
            assert abs(rep.analytic_form[0, 0] - expected) / scale < 1e-9
            assert abs(rep.numeric_form[0, 0] - expected) / scale < 1e-6
            posdef, _ = predicted_signature(rz_kostant, a_log, X, w)
            assert posdef == (x * sign * t < 0)


def test_kernel_dims_frozen(rz):
    zero = ex.zeros(rz.dim)
    expected = {
        "kostant_sl2": [((1, -1), 0), (zero, 1)],
        "sl2_so11": [((1, -1), 0), (zero, 1)],
        "sl3_so21": [((2, 1, -3), 0), ((1, 1, -2), 1), (zero, 3)],
        "group_sl2": [((1, -1, -1, 1), 2), (zero, 3)],
    }[rz.name]
    for X, kd in expected:
        assert kernel_dim(rz, X) == kd, (rz.name, X)


def test_halfspace_check(rz_so11):
    w = _identity_w(rz_so11)
    assert local_min_halfspace_check(rz_so11, (1, -1), (1, -1), w)
    with pytest.raises(NotALocalMin):
        local_min_halfspace_check(rz_so11, (1, -1), (-1, 1), w)


def test_halfspace_check_kostant(rz_kostant):
    w = _identity_w(rz_kostant)
    assert local_min_halfspace_check(rz_kostant, (1, -1), (-1, 1), w)
    with pytest.raises(NotALocalMin):
        local_min_halfspace_check(rz_kostant, (1, -1), (1, -1), w)


def test_omega_X_at_zero_is_full_hull(rz):
    a_log = ensure_regular(rz, _a_log(rz))
    _, minus = plus_minus(rz.base_parabolic)
    full = omega(a_log, weyl_orbit(rz.small_weyl, a_log),
                 gamma_aq(sorted(minus), rz.datum))
    out = omega_X(rz, a_log, ex.zeros(rz.dim))
    for w, om in out.items():
        assert om.vertices == full.vertices
        assert frozenset(om.cone.generators) == frozenset(full.cone.generators)


def test_omega_X_generic_is_singleton(rz):
    a_log = ensure_regular(rz, _a_log(rz))
    X = a_log
    out = omega_X(rz, a_log, X)
    for w, om in out.items():
        wln = ex.mat_vec(rz.small_weyl.inverse(w), a_log)
        assert om.vertices == (wln,)
        assert om.cone.generators == ()


def test_omega_X_wall_sl3(rz_sl3):
    a_log = ensure_regular(rz_sl3, (2, 1, -3))
    X = tuple(Fraction(c) for c in (1, 1, -2))
    out = omega_X(rz_sl3, a_log, X)
    gX = ex.mat_vec(rz_sl3.datum.gram, X)
    for w, om in out.items():
        assert 1 <= len(om.vertices) <= 2
        assert om.cone.generators == ()
        level = min(ex.dot(gX, u) for u in om.vertices)
        assert level == critical_value(rz_sl3, a_log, X, w)


def test_sample_H_X_centralizes(rz):
    X = _a_log(rz)
    Xm = a_matrix(np.array([float(c) for c in X]))
    hs = sample_H_X(rz, X, 1.0, 16, seed=4)
    assert np.abs(hs @ Xm - Xm @ hs).max() < 1e-9
    assert np.abs(rz.sigma_grp(hs) - hs).max() < 1e-9
    assert np.array_equal(hs, sample_H_X(rz, X, 1.0, 16, seed=4))


def test_sample_NPH_shape(rz):
    ns = sample_NPH(rz, count=8, seed=6)
    assert ns.shape == (8, rz.dim, rz.dim)
    assert np.abs(rz.sigma_grp(ns) - ns).max() < 1e-10
    if rz.name != "group_sl2":
        assert np.array_equal(ns, np.tile(np.eye(rz.dim), (8, 1, 1)))
    else:
        # unipotent and strictly inside the nilradical for the base order
        assert np.abs(np.tril(ns - np.eye(4))).max() < 1e-12
        assert not np.array_equal(ns, np.tile(np.eye(4), (8, 1, 1)))


def test_vanishing_patterns(rz):
    counts = {"kostant_sl2": 2, "sl2_so11": 2, "sl3_so21": 5, "group_sl2": 2}
    pats = vanishing_patterns(rz, per_pattern=4, seed=1)
    assert len(pats) == counts[rz.name]
    pos = {lam for lam in rz.restricted.roots_q if lam > ex.neg(lam)}
    seen = set()
    for S, wits in pats:
        seen.add(S)
        assert wits
        for X in wits:
            assert rz.datum.pr_q(X) == X
            for lam in pos:
                if lam in S:
                    assert ex.dot(lam, X) == 0
                else:
                    assert ex.dot(lam, X) != 0
    assert frozenset() in seen
    assert frozenset(pos) in seen
