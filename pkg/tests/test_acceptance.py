"""End-to-end acceptance checks, one test per criterion.

Every test records a one-line PASS/FAIL summary (printed at the end of the
run) before asserting, so the summary is complete even when a check fails.
"""
import math
import time

import numpy as np
import pytest

from cavitychain import (ModelParams, ModeState, beta_from_coth, build_U_closed, build_U_exact,
                         cavity_char_fn, coth_half, component_formula_e, component_formula_pair,
                         d_functional, pair_covariance, propagation_matrix, propagator_blocks,
                         steady_state_char_fn, thermo_summary, covariance)
from cavitychain.fock import oracle_check
from cavitychain.sampling import fock_one_state, random_label, random_params, squeezed_vacuum
from cavitychain.window import (IDENTITY_NAMES, advance_rotate_drop, fixed_point_residual, identity_battery,
                                window_state, window_state_finite)

from .conftest import record


def _slope(xs, ys):
    return float(np.polyfit(np.asarray(xs, float), np.log(np.asarray(ys, float)), 1)[0])


def _theta_grid(radius=2.0, n_radii=9, n_angles=8):
    r = np.linspace(0.0, radius, n_radii)[1:]
    a = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    return (r[:, None] * a[None, :]).ravel()


def test_criterion_01_scalar_identities():
    rng = np.random.default_rng(101)
    times = np.linspace(0.1, 10.0, 10)
    t0 = time.perf_counter()
    sym, row_max, n = 0.0, 0.0, 0
    for _ in range(200):
        p = random_params(rng)
        for t in times:
            b = propagator_blocks(p, float(t))
            sym = max(sym, abs(b.symplectic_defect()))
            row_max = max(row_max, b.row_norm())
            n += 1
    secs = time.perf_counter() - t0
    ok = n >= 1000 and sym <= 1e-12 and row_max < 1.0 and secs < 1.0
    record(1, ok, f"{n} samples, max |z z- - w^2 - 1| = {sym:.1e}, max row norm = {row_max:.6f}, {secs:.2f} s")
    assert ok


def test_criterion_02_step_matrices():
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    dev, count = 0.0, 0
    for i in range(200):
        p = random_params(rng)
        N = 1 + i % 6
        for ell in range(1, N + 1):
            A = build_U_exact(ell, N, p, p.tau).matrix
            B = build_U_closed(ell, N, p).matrix
            dev = max(dev, float(np.max(np.abs(A - B))))
            count += 1
    secs = time.perf_counter() - t0
    ok = dev <= 1e-10 and secs < 10.0
    record(2, ok, f"200 parameter sets, {count} step matrices, max entry deviation = {dev:.1e}, {secs:.2f} s")
    assert ok


def test_criterion_03_component_formulas():
    rng = np.random.default_rng(103)
    t0 = time.perf_counter()
    dev_e = dev_pair = phase_dev = 0.0
    n_cases = 0
    for _ in range(5):
        p = random_params(rng)
        Nmax = 20
        M = propagation_matrix(range(1, Nmax + 1), Nmax, p)
        for m in range(1, Nmax + 1):
            ref = propagation_matrix(range(1, m + 1), Nmax, p)[:, 0]
            got = component_formula_e(m, Nmax, p)
            dev_e = max(dev_e, float(np.max(np.abs(got - ref))))
            # literal form carries the N-step phase; it differs by a pure phase only
            literal = np.exp(1j * (Nmax - m) * p.tau * p.epsilon) * got
            phase_dev = max(phase_dev, float(np.max(np.abs(np.abs(literal) - np.abs(ref)))))
            n_cases += 1
        for N in range(2, Nmax + 1):
            M = propagation_matrix(range(1, N + 1), N, p)
            a = complex(*rng.normal(size=2))
            b = complex(*rng.normal(size=2))
            for n in range(1, N + 1):
                got = component_formula_pair("cavity-chain", (n,), N, p, (a, b))
                dev_pair = max(dev_pair, float(np.max(np.abs(got - (a * M[:, 0] + b * M[:, n])))))
                n_cases += 1
                for mm in range(1, n):
                    got = component_formula_pair("chain-chain", (mm, n), N, p, (a, b))
                    dev_pair = max(dev_pair, float(np.max(np.abs(got - (a * M[:, mm] + b * M[:, n])))))
                    n_cases += 1
    secs = time.perf_counter() - t0
    ok = max(dev_e, dev_pair, phase_dev) <= 1e-12 and secs < 5.0
    record(3, ok, f"{n_cases} formulas up to 20 steps, max deviation cavity = {dev_e:.1e}, "
                  f"pairs = {dev_pair:.1e}, phase-stripped = {phase_dev:.1e}, {secs:.2f} s")
    assert ok


def test_criterion_04_gibbs_steady_state():
    rng = np.random.default_rng(104)
    betas = (0.5, 1.5, 4.0)
    thetas = np.array([0.3, 1.0, 1.7j, -1.2 + 0.5j])
    t0 = time.perf_counter()
    d_rel = coth_rel = 0.0
    ordered = True
    for _ in range(50):
        p = random_params(rng)
        q = propagator_blocks(p, p.tau)
        for beta in betas:
            rho1 = ModeState.gibbs(beta)
            closed = d_functional(rho1, p, q.gw * thetas)
            prod = d_functional(rho1, p, q.gw * thetas, method="product")
            d_rel = max(d_rel, float(np.max(np.abs(prod - closed) / np.abs(closed))))
            # effective temperature read off the steady-state characteristic function
            val = steady_state_char_fn(rho1, p, 1.0)
            c_star = -4.0 * math.log(abs(val))
            s = thermo_summary(p, beta)
            expected = (1.0 - s.lam) * p.reservoir_coth + s.lam * coth_half(beta)
            coth_rel = max(coth_rel, abs(c_star - expected) / expected)
            b_star = beta_from_coth(c_star)
            lo, hi = sorted((s.beta_star_0, beta))
            tol = 1e-10 * max(1.0, b_star) if math.isfinite(b_star) else 0.0
            ordered &= lo - tol <= b_star <= hi + tol
    secs = time.perf_counter() - t0
    ok = d_rel <= 1e-10 and coth_rel <= 1e-10 and ordered and secs < 5.0
    record(4, ok, f"3 x 50 grid, product vs closed rel = {d_rel:.1e}, coth interpolation rel = {coth_rel:.1e}, "
                  f"ordering {'holds' if ordered else 'violated'}, {secs:.2f} s")
    assert ok


def test_criterion_05_decoupled_limit():
    rng = np.random.default_rng(105)
    thetas = _theta_grid(3.0)
    worst, beta_dev = 0.0, 0.0
    for _ in range(20):
        p = random_params(rng).replace(eta=0.0)
        r = p.reservoir_coth
        assert r == (p.sigma_minus + p.sigma_plus) / (p.sigma_minus - p.sigma_plus)
        ref = np.exp(-0.25 * np.abs(thetas) ** 2 * r)
        for rho1 in (ModeState.gibbs(0.7), ModeState.gibbs(3.0), fock_one_state()):
            got = steady_state_char_fn(rho1, p, thetas)
            worst = max(worst, float(np.max(np.abs(got - ref) / ref)))
        s = thermo_summary(p, 1.0)
        if p.sigma_plus > 0:
            beta_dev = max(beta_dev, abs(s.beta_star - s.beta_star_0) / s.beta_star_0)
        assert s.lam == 0.0 and s.coth_star == r
    ok = worst <= np.finfo(float).eps and beta_dev <= 1e-14
    record(5, ok, f"20 decoupled parameter sets, max relative deviation from reservoir Gibbs = {worst:.1e}, "
                  f"beta* vs reservoir beta = {beta_dev:.1e}")
    assert ok


def test_criterion_06_convergence_rate():
    cases = [ModelParams(1.0, 1.0, 0.1, 1.0, 0.2, 0.0), ModelParams(1.3, 0.8, 0.3, 0.7, 0.25, 0.05),
             ModelParams(0.9, 1.1, 0.2, 1.5, 0.12, 0.02)]
    thetas = _theta_grid(2.0)
    rho0, rho1 = ModeState.gibbs(0.5), ModeState.gibbs(2.0)
    Ns = np.arange(10, 61)
    t0 = time.perf_counter()
    worst, details = 0.0, []
    for p in cases:
        q = abs(propagator_blocks(p, p.tau).gz)
        star = steady_state_char_fn(rho1, p, thetas)
        errs = [np.max(np.abs(cavity_char_fn(N * p.tau, rho0, rho1, p, thetas) - star)) for N in Ns]
        fit = _slope(Ns, errs)
        rel = abs(fit - 2 * math.log(q)) / abs(2 * math.log(q))
        worst = max(worst, rel)
        details.append(f"|gz|={q:.3f} fit={fit:.4f} vs {2 * math.log(q):.4f}")
    secs = time.perf_counter() - t0
    ok = worst <= 0.05 and secs < 5.0
    record(6, ok, f"N = 10..60, {'; '.join(details)}, worst rel = {worst:.1e}, {secs:.2f} s")
    assert ok


def test_criterion_07_identity_battery():
    t0 = time.perf_counter()
    res = identity_battery(n_instances=50, seed=7)
    rng = np.random.default_rng(107)
    grid = _theta_grid(2.0)
    fp = 0.0
    for _ in range(10):
        p = random_params(rng)
        for rho1 in (ModeState.gibbs(1.0), ModeState.displaced_gibbs(1.5, 0.4 - 0.3j), fock_one_state(),
                     squeezed_vacuum(0.4, 0.9)):
            fp = max(fp, fixed_point_residual(rho1, p, grid))
    secs = time.perf_counter() - t0
    ident = {k: v for k, v in res.items() if k != "fixed-point-residual"}
    worst_name = max(ident, key=ident.get)
    ok = (set(res) == set(IDENTITY_NAMES) and max(ident.values()) <= 1e-12
          and max(fp, res["fixed-point-residual"]) <= 1e-10 and secs < 30.0)
    record(7, ok, f"{len(res)} identities x 50 instances, worst {worst_name} = {ident[worst_name]:.1e}, "
                  f"fixed-point residual = {max(fp, res['fixed-point-residual']):.1e}, {secs:.2f} s")
    assert ok


@pytest.mark.slow
def test_criterion_08_fock_oracle():
    rng = np.random.default_rng(108)
    t0 = time.perf_counter()
    worst_m = worst_c = 0.0
    monotone = True
    for _ in range(10):
        p = random_params(rng, max_sigma_ratio=0.2)
        b0, b = rng.uniform(1.6, 2.2, size=2)
        for N in (1, 2):
            reps = {d: oracle_check(p, N, d, b0, b, with_eigen=(d == 12), check_tail=(d == 12))
                    for d in (8, 10, 12)}
            worst_m = max(worst_m, reps[12].moment_error)
            worst_c = max(worst_c, reps[12].char_fn_error)
            for key in ("moment_error", "char_fn_error"):
                seq = [getattr(reps[d], key) for d in (8, 10, 12)]
                monotone &= seq[0] > seq[1] > seq[2]
    secs = time.perf_counter() - t0
    ok = worst_m <= 1e-4 and worst_c <= 5e-4 and monotone and secs < 600.0
    record(8, ok, f"10 parameter sets, N in (1, 2), d = 12: moments {worst_m:.1e}, char fn {worst_c:.1e}; "
                  f"errors {'decrease' if monotone else 'do not decrease'} for d = 8, 10, 12; {secs:.1f} s")
    assert ok


def test_criterion_09_correlation_asymptotics():
    rng = np.random.default_rng(109)
    t0 = time.perf_counter()
    worst_rate, min_fixed_gap, chain_dev, decoupled_offdiag = 0.0, math.inf, 0.0, 0.0
    for _ in range(4):
        p = random_params(rng, eta_fraction=(0.2, 0.9))
        b0, b = 0.8, 2.5
        q = abs(propagator_blocks(p, p.tau).gz)
        for n in (1, 3):
            Ns = np.arange(20, 61)
            off = [abs(pair_covariance("cavity-chain", (n,), int(N), b0, b, p)[0, 1]) for N in Ns]
            fit = _slope(Ns, off)
            worst_rate = max(worst_rate, abs(fit - math.log(q)) / abs(math.log(q)))
        for gap in (0, 1, 2):
            off = [abs(pair_covariance("cavity-chain", (N - gap,), N, b0, b, p)[0, 1]) for N in range(gap + 1, 61)]
            min_fixed_gap = min(min_fixed_gap, min(off) / max(off))
        for mm, n in ((1, 2), (2, 5)):
            ref = pair_covariance("chain-chain", (mm, n), n, b0, b, p)
            for N in range(n, 61):
                chain_dev = max(chain_dev, float(np.max(np.abs(pair_covariance("chain-chain", (mm, n), N, b0, b, p) - ref))))
        dec = p.replace(eta=0.0)
        for N in (5, 30, 60):
            for mm, n in ((1, 2), (2, 5)):
                decoupled_offdiag = max(decoupled_offdiag, abs(pair_covariance("chain-chain", (mm, n), N, b0, b, dec)[0, 1]))
    # closed-form blocks agree with the full covariance
    p = random_params(rng)
    X = covariance(12, 0.8, 2.5, p).X
    block_dev = float(np.max(np.abs(pair_covariance("cavity-chain", (4,), 12, 0.8, 2.5, p) - X[np.ix_([0, 4], [0, 4])])))
    secs = time.perf_counter() - t0
    ok = (worst_rate <= 0.05 and min_fixed_gap >= 0.05 and chain_dev <= 1e-12 and decoupled_offdiag == 0.0
          and block_dev <= 1e-12 and secs < 10.0)
    record(9, ok, f"N <= 60: decay rate rel error = {worst_rate:.1e}, fixed N-n min/max = {min_fixed_gap:.2f}, "
                  f"chain-chain N dependence = {chain_dev:.1e}, decoupled off-diagonal = {decoupled_offdiag:.1e}, "
                  f"{secs:.2f} s")
    assert ok


def test_criterion_10_window_stationarity():
    rng = np.random.default_rng(110)
    p = ModelParams(1.0, 1.0, 0.5, 1.0, 0.2, 0.05)
    q = abs(propagator_blocks(p, p.tau).gz)
    Z = np.stack([random_label(rng, 3) for _ in range(64)], axis=1)
    t0 = time.perf_counter()
    inv = 0.0
    for rho1 in (ModeState.gibbs(1.0), ModeState.displaced_gibbs(1.5, 0.4j), fock_one_state(),
                 squeezed_vacuum(0.3, 1.1)):
        win = window_state(2, p, rho1)
        inv = max(inv, float(np.max(np.abs(advance_rotate_drop(win, rho1, p)(Z) - win(Z)))))
    ks = np.arange(10, 41)
    rho1 = ModeState.gibbs(1.0)
    lim = window_state(2, p, rho1)(Z)
    slopes, envelope_ok = [], True
    for rho0 in (ModeState.displaced_gibbs(0.8, 0.7), ModeState.displaced_gibbs(2.0, -0.5 + 0.5j)):
        errs = [np.max(np.abs(window_state_finite(2, int(k), p, rho0, rho1)(Z) - lim)) for k in ks]
        slopes.append(_slope(ks, errs))
    # gauge-invariant start: converges at least as fast as |gz|^k
    errs = [np.max(np.abs(window_state_finite(2, int(k), p, ModeState.gibbs(0.5), rho1)(Z) - lim)) for k in ks]
    envelope_ok = all(e <= errs[0] * q ** (k - ks[0]) * (1 + 1e-9) for e, k in zip(errs, ks))
    secs = time.perf_counter() - t0
    rate_rel = max(abs(s - math.log(q)) / abs(math.log(q)) for s in slopes)
    ok = inv <= 1e-8 and rate_rel <= 0.05 and envelope_ok and secs < 30.0
    record(10, ok, f"n = 2 invariance = {inv:.1e}; finite-k fits {', '.join(f'{s:.4f}' for s in slopes)} "
                   f"vs ln|gz| = {math.log(q):.4f}; Gibbs start within |gz|^k envelope: {envelope_ok}; {secs:.2f} s")
    assert ok
