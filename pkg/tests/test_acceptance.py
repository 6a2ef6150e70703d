"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py`` or through pytest; the
pytest terminal summary repeats the lines in criterion order.
"""

import time

import numpy as np
import pytest

from qht import ensembles, fcs, ldp, quasifree as qf, testing
from qht.ldp import EntropicFunction
from qht.qstate import modular_spectral_measure, monotonicity_gap, renyi_relative_entropy

from helpers import ACCEPTANCE, acceptance_line, measure_mismatch, random_system

S_GRID = np.round(np.linspace(0, 1, 11), 12)


def record(num: int, ok: bool, detail: str) -> None:
    ACCEPTANCE.append((num, bool(ok), detail))
    print(acceptance_line(num, ok, detail))
    assert ok, detail


def test_criterion_01_trace_inequality():
    g = ensembles.rng(1)
    start = time.perf_counter()
    worst = np.inf
    for _ in range(1000):
        n = int(g.integers(2, 9))
        a, b = ensembles.random_positive(g, n), ensembles.random_positive(g, n)
        worst = min(worst, min(testing.trace_inequality_gap(a, b, s) for s in S_GRID))
    elapsed = time.perf_counter() - start
    record(1, worst >= -1e-10 and elapsed <= 10,
           f"trace inequality min gap {worst:.3e} over 1000 pairs in {elapsed:.1f}s")


def test_criterion_02_neyman_pearson():
    g = ensembles.rng(2)
    worst = 0.0
    for _ in range(200):
        n = int(g.integers(2, 13))
        nu, om = ensembles.random_diagonal_pair(g, n)
        brute = testing.commuting_enumeration_minimum(nu, om)
        worst = max(worst, abs(brute - testing.min_error_formula(nu, om)),
                    abs(brute - testing.optimal_test(nu, om)[1]))
    record(2, worst <= 1e-11, f"enumeration vs optimal error max deviation {worst:.3e}")


def test_criterion_03_bound_sandwich():
    g = ensembles.rng(3)
    worst = -np.inf
    for _ in range(500):
        n = int(g.integers(2, 9))
        nu, om = ensembles.random_state(g, n), ensembles.random_state(g, n)
        d = testing.optimal_test(nu, om)[1]
        lo = testing.modular_lower_bound(nu, om)
        up = min(testing.chernoff_upper_bound(nu, om, s) for s in S_GRID)
        worst = max(worst, lo - d, d - up)
    record(3, worst <= 1e-10, f"max sandwich violation {worst:.3e} over 500 pairs")


def test_criterion_04_modular_laplace():
    g = ensembles.rng(4)
    worst = 0.0
    for _ in range(200):
        n = int(g.integers(2, 9))
        nu, om = ensembles.random_state(g, n), ensembles.random_state(g, n)
        mu = modular_spectral_measure(nu, om)
        for s in S_GRID:
            direct = testing.chernoff_upper_bound(nu, om, s)  # Tr nu^s omega^(1-s)
            worst = max(worst, abs(mu.laplace(s) - direct) / direct)
    record(4, worst <= 1e-10, f"Laplace transform relative error {worst:.3e}")


def test_criterion_05_monotonicity():
    g = ensembles.rng(5)
    worst = np.inf
    for _ in range(500):
        n = int(g.integers(2, 7))
        nu2, om2 = ensembles.random_positive(g, n), ensembles.random_positive(g, n)
        nu1 = nu2 + ensembles.random_positive(g, n)
        om1 = om2 + ensembles.random_positive(g, n)
        worst = min(worst, min(monotonicity_gap(nu1, nu2, om1, om2, s) for s in S_GRID))
    record(5, worst >= -1e-10, f"monotonicity min gap {worst:.3e} over 500 quadruples")


def test_criterion_06_fcs_identities():
    errs = dict(mass=0.0, qprelat=0.0, mean=0.0, var=0.0, genes=0.0, balance=0.0)
    min_prod = np.inf
    for seed in range(60):
        sys_ = random_system(6000 + seed)
        for t in (0.5, 1.0, 2.0):
            d = fcs.fcs_distribution(sys_, t)
            errs["mass"] = max(errs["mass"], abs(d.measure.mass - 1))
            errs["qprelat"] = max(errs["qprelat"], measure_mismatch(d.measure, fcs.fcs_from_modular(sys_, t)))
            sig = fcs.mean_entropy_production_observable(sys_, t).matrix
            m = sys_.omega(sig)
            v = sys_.omega(sig @ sig) - m**2
            errs["mean"] = max(errs["mean"], abs(d.mean() - m))
            errs["var"] = max(errs["var"], abs(d.variance() - v))
            back = modular_spectral_measure(fcs.evolve(sys_, -t), sys_.omega)
            fwd = modular_spectral_measure(fcs.evolve(sys_, t), sys_.omega)
            errs["genes"] = max(errs["genes"], measure_mismatch(back, fwd.reflected().tilted(1.0)))
            errs["balance"] = max(errs["balance"], abs(m - fcs.entropy_balance(sys_, t)))
            min_prod = min(min_prod, m)
    ok = (errs["mass"] <= 1e-10 and errs["qprelat"] <= 1e-9 and errs["mean"] <= 1e-10
          and errs["var"] <= 1e-10 and errs["genes"] <= 1e-10 and errs["balance"] <= 1e-10
          and min_prod >= -1e-10)
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + f", min production {min_prod:.2e}"
    record(6, ok, f"FCS identities: {detail}")


def test_criterion_07_evans_searles():
    worst = 0.0
    for seed in range(100):
        sys_ = random_system(7000 + seed, tri=True)
        for t in (0.5, 1.0, 2.0):
            tab = fcs.renyi_table(sys_, [t], S_GRID)[0]
            worst = max(worst, np.abs(tab - tab[::-1]).max())
    record(7, worst <= 1e-9, f"TRI |e_t(s) - e_t(1-s)| max {worst:.3e} over 100 systems")


def test_criterion_08_legendre():
    checks = {}
    # e(s) = s(s-1) at N = 512 against the analytic transform on [-1, 1]
    e = EntropicFunction.from_function(lambda s: s * (s - 1), 0, 1, 512)
    theta = np.linspace(-1, 1, 401)
    checks["quadratic"] = np.abs(ldp.legendre(e, theta).phi_values - ((theta + 1) / 2) ** 2).max()
    young, involution, psi0 = 0.0, 0.0, 0.0
    tests = [
        lambda s: s * (s - 1),
        lambda s: np.log(0.3**s * 0.6 ** (1 - s) + 0.7**s * 0.4 ** (1 - s)),
        lambda s: 0.7 * (np.cosh(2 * s - 1) - np.cosh(1.0)),
        lambda s: np.log(np.cosh(3 * (s - 0.5)) / np.cosh(1.5)) + 0.2 * s * (s - 1),
    ]
    for f in tests:
        e = EntropicFunction.from_function(f, 0, 1, 512)
        th = ldp.default_theta_grid(e, 4097)
        rf = ldp.legendre(e, th)
        scale = max(1.0, np.abs(rf.phi_values).max())
        excess = th[:, None] * e.grid[None, :] - e.values[None, :] - rf.phi_values[:, None]
        young = max(young, excess.max() / scale)
        lip = np.abs(np.diff(e.values) / e.h).max()
        back = ldp.inverse_legendre(rf, e.grid)
        involution = max(involution, np.abs(back - e.values).max() / (2 * max(e.h, th[1] - th[0]) * lip))
        psi0 = max(psi0, abs(ldp.psi(e, 0.0) + ldp.subdifferential(e, 1.0)[0]))
    checks["young"], checks["involution_ratio"], checks["psi0"] = young, involution, psi0
    ok = (checks["quadratic"] <= 1e-4 and young <= 1e-12 and involution <= 1.0 and psi0 <= 1e-6)
    record(8, ok, "Legendre: " + ", ".join(f"{k} {v:.2e}" for k, v in checks.items()))


def test_criterion_09_quasifree_fock():
    g = ensembles.rng(9)
    worst = 0.0
    for i in range(100):
        n = 2 + i % 5
        a, b = ensembles.random_density(g, n), ensembles.random_density(g, n)
        fa, fb = qf.fock_state(a), qf.fock_state(b)
        for s in S_GRID:
            exact = renyi_relative_entropy(fa, fb, s)
            val = qf.quasifree_renyi(a, b, s)
            worst = max(worst, abs(val - exact) / max(abs(exact), 1e-12) if abs(exact) > 1e-12
                        else abs(val - exact))
    record(9, worst <= 1e-9, f"determinant formula vs Fock space max relative error {worst:.3e}")


def test_criterion_10_xy_chain():
    start = time.perf_counter()
    tol = qf.QUAD_TOL
    eq = qf.XySpec(1.0, 0.0, 1.3, 1.3)
    eq_err = max(max(abs(qf.xy_e(eq, s)) for s in S_GRID), abs(qf.xy_sigma(eq)))
    spec = qf.XySpec(J=1.0, lam=0.0, beta_L=1.0, beta_R=2.0, beta=1.5, n=3, m=128)
    ends = max(abs(qf.xy_e(spec, 0.0)), abs(qf.xy_e(spec, 1.0)))
    sym = max(abs(qf.xy_e(spec, s) - qf.xy_e(spec, 1 - s)) for s in S_GRID)
    h = 1e-4
    fd = (3 * qf.xy_e(spec, 1) - 4 * qf.xy_e(spec, 1 - h) + qf.xy_e(spec, 1 - 2 * h)) / (2 * h)
    sig_err = abs(fd - qf.xy_sigma(spec))
    target = qf.xy_e(spec, 0.5)
    devs = []
    for m in (128, 256, 512):
        t = m / 4
        devs.append(abs(qf.xy_finite_renyi(spec.with_m(m), t, 0.5) / t - target))
    elapsed = time.perf_counter() - start
    ok = (eq_err <= 1e-12 and ends <= tol and sym <= tol and sig_err <= 1e-6
          and devs[0] > devs[1] > devs[2] and devs[2] <= 5e-2 and elapsed <= 120)
    record(10, ok, f"XY: equilibrium {eq_err:.1e}, endpoints {ends:.1e}, symmetry {sym:.1e}, "
                   f"Sigma+ vs e'(1) {sig_err:.1e}, finite-m deviations "
                   + "/".join(f"{d:.2e}" for d in devs) + f", {elapsed:.0f}s")


def _ebb(seed, real=False, betas=(1.0, 2.5), mus=(0.2, 0.5)):
    g = ensembles.rng(seed)
    h = 0.5 * ensembles.random_hermitian(g, 3, real=real)
    return qf.EbbSpec(h, (np.eye(3)[0], np.eye(3)[2]), 0.6, betas, mus)


def test_criterion_11_ebb():
    tol = 10 * qf.QUAD_TOL
    spec = _ebb(110)
    ident = max(abs(qf.ebb_e(spec, s, lambda k: np.eye(2))) for s in (0.25, 0.5, 0.75))
    eq = _ebb(111, betas=(1.4, 1.4), mus=(0.3, 0.3))
    eq_res = qf.landauer(eq)
    eq_err = max(max(abs(qf.ebb_e(eq, s)) for s in (0.25, 0.5)), abs(eq_res.sigma_plus),
                 abs(eq_res.heat_fluxes.sum()))
    unit = 0.0
    for seed in range(112, 117):
        sp = _ebb(seed)
        for k in np.linspace(1e-3, np.pi - 1e-3, 200):
            s_k = qf.ebb_scattering(sp, k)
            unit = max(unit, np.abs(s_k @ s_k.conj().T - np.eye(2)).max())
    h = 1e-3
    e = lambda s: qf.ebb_e(spec, s)
    fd = (3 * e(1) - 4 * e(1 - h) + e(1 - 2 * h)) / (2 * h)
    sig_err = abs(fd - qf.landauer(spec).sigma_plus)
    tri = _ebb(118, real=True)
    tri_err = max(abs(qf.ebb_e(tri, s) - qf.ebb_e(tri, 1 - s)) for s in (0.1, 0.3))
    ok = ident <= tol and eq_err <= tol and unit <= 1e-8 and sig_err <= 1e-5 and tri_err <= tol
    record(11, ok, f"EBB: identity {ident:.1e}, equilibrium {eq_err:.1e}, unitarity {unit:.1e}, "
                   f"Sigma+ vs e'(1) {sig_err:.1e}, TRI symmetry {tri_err:.1e}")


def test_criterion_12_arrow_of_time():
    worst_order, worst_shift = -np.inf, 0.0
    for seed in range(12):
        spec = ensembles.random_open_spec(ensembles.rng(1200 + seed))
        sys_ = fcs.build_open_system(spec)
        assert sys_.is_tri
        rows = fcs.arrow_exponent_estimate(sys_, [0.25, 0.5, 1.0, 2.0, 4.0], S_GRID)
        for r in rows:
            worst_order = max(worst_order, r.lower_exponent - r.exponent, r.exponent - r.upper_exponent)
            worst_shift = max(worst_shift, abs(r.min_error - r.min_error_shifted))
    ok = worst_order <= 1e-10 and worst_shift <= 1e-10
    record(12, ok, f"arrow of time: bound violation {worst_order:.2e}, "
                   f"|D(w_t,w_-t) - D(w_2t,w)| {worst_shift:.1e}")


def test_criterion_13_spin_fermion():
    zero = abs(qf.spin_fermion_sigma2([1.0, 0.5, 2.0], [1.7, 1.7, 1.7]))
    val = qf.spin_fermion_sigma2([1.0, 1.0], [1.0, 2.0])
    # independent scalar evaluation: only the two off-diagonal terms survive, each
    # (1 * 1 / 2) * (-1) sinh(-1) / (cosh 1 cosh 2)
    scalar = (np.pi / 2) * 2 * 0.5 * np.sinh(1.0) / (np.cosh(1.0) * np.cosh(2.0))
    ok = zero == 0.0 and abs(val - scalar) <= 1e-10 and abs(val - 0.31798) <= 5e-6
    record(13, ok, f"spin-fermion: equal-beta {zero:.1e}, value {val:.10f} vs {scalar:.10f}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
