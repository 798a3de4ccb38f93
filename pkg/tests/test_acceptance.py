"""Acceptance gate: one test (and one PASS/FAIL line) per criterion.

Run with `pytest -v -s tests/test_acceptance.py` to see the lines; each
criterion is also an ordinary assertion so the suite fails loudly.
"""

import math

import numpy as np
import pytest

from lensflow import (
    FlowConfig,
    SolitonParams,
    build_profile,
    find_critical_radii,
    integrate_mcf,
    integrate_rmcf,
    lambda_of_radius,
    lambda_tail_coefficients,
    maximal_time_closed_form,
    ode_residual_scan,
    probe_points,
    radial_state,
    second_fundamental_norm2,
    soliton_constant_residual,
    soliton_equation_residual_fd,
)
from lensflow.reports import table1_report
from lensflow.validation import brute_force_h_ode

from conftest import MATRIX


def _report(num: int, ok: bool, detail: str):
    print(f"CRITERION {num:02d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_soliton_constant(profiles):
    worst = 0.0
    for (n, k), prof in profiles.items():
        assert 0.0 < prof.c < 1.0
        worst = max(worst, abs(soliton_constant_residual(prof.c, prof.params)))
    params21 = SolitonParams(2, 1)
    i0 = soliton_constant_residual(0.0, params21) + 2.0 / 3.0
    i1 = soliton_constant_residual(1.0, params21) - (9 * math.exp(-3) - math.exp(-1))
    ok = worst < 1e-12 and abs(i0) < 1e-12 and abs(i1) < 1e-12
    _report(1, ok, f"max |I(c)| = {worst:.2e}, endpoint errors "
                   f"{abs(i0):.2e}/{abs(i1):.2e}")


def test_criterion_02_construction_certificate(profile21):
    ode_sup, holo_sup = ode_residual_scan(profile21)
    probes = probe_points(2)
    fd = [soliton_equation_residual_fd(profile21, z) for z in probes]
    corrupted = soliton_equation_residual_fd(profile21, probes[0], corrupt_dc=1e-3)
    ok = (ode_sup < 1e-8 and holo_sup < 1e-8
          and max(fd) < 1e-4 and corrupted > 1e-3)
    _report(2, ok, f"ode sup {ode_sup:.2e}, holomorphy sup {holo_sup:.2e}, "
                   f"fd max {max(fd):.2e} over {len(fd)} probes, "
                   f"corrupted fd {corrupted:.2e}")


def test_criterion_03_critical_radii(profiles):
    worst1 = worst2 = 0.0
    for prof in profiles.values():
        crit = find_critical_radii(prof)
        assert crit.r1 < crit.r2
        assert crit.dlambda_dr_at_r1 > 0.0 and crit.dlambda_dr_at_r2 > 0.0
        worst1 = max(worst1, abs(float(lambda_of_radius(prof, crit.r1)) + 1.0))
        worst2 = max(worst2, abs(float(lambda_of_radius(prof, crit.r2))))
        # five-interval classification at sampled radii
        assert float(lambda_of_radius(prof, 0.5 * crit.r1)) < -1.0
        mid = float(lambda_of_radius(prof, 0.5 * (crit.r1 + crit.r2)))
        assert -1.0 < mid < 0.0
        assert float(lambda_of_radius(prof, 2.0 * crit.r2)) > 0.0
    ok = worst1 < 1e-10 and worst2 < 1e-10
    _report(3, ok, f"max |lambda(r1)+1| = {worst1:.2e}, "
                   f"max |lambda(r2)| = {worst2:.2e} over {len(profiles)} pairs")


def _loglog_slope(profile, s_window):
    s = np.linspace(*s_window, 24)
    a2 = np.array([radial_state(profile, math.exp(si / 2.0)).normA2 for si in s])
    # d log A2 / d log r with log r = s/2
    return float(np.polyfit(s / 2.0, np.log(a2), 1)[0])


def test_criterion_04_asymptotic_rates(profiles):
    worst_pct = 0.0
    worst_coeff = 0.0
    for (n, k), prof in profiles.items():
        crit = find_critical_radii(prof)
        for slope, want in ((crit.tail_slope_zero, -2.0 * k),
                            (crit.tail_slope_infinity, 2.0 * k)):
            worst_pct = max(worst_pct, abs(slope / want - 1.0))
        # |A|^2 rates near both ends of the grid
        lo = _loglog_slope(prof, (prof.s_lo + 0.2, prof.s_lo + 2.2))
        hi = _loglog_slope(prof, (prof.s_hi - 2.2, prof.s_hi - 0.2))
        worst_pct = max(worst_pct, abs(lo / (-2.0 * k) - 1.0),
                        abs(hi / (2.0 * k) - 1.0))
        A, _ = lambda_tail_coefficients(prof)
        for r in (1e-2, 1e-3):
            got = float(lambda_of_radius(prof, r)) * r ** (2 * k)
            worst_coeff = max(worst_coeff, abs(got / (-A) - 1.0))
    ok = worst_pct < 0.01 and worst_coeff < 0.005
    _report(4, ok, f"worst slope error {100 * worst_pct:.3f}%, "
                   f"worst tail-coefficient error {100 * worst_coeff:.3f}%")


def test_criterion_05_rmcf_bifurcation(profile21):
    crit = find_critical_radii(profile21)
    r1, r2 = crit.r1, crit.r2
    radii = [0.5 * r1, 0.9 * r1, 1.1 * r1, 0.5 * (r1 + r2), r2, 2.0 * r2]
    want = ["S0", "S0", "S_infinity", "S_infinity", "S_infinity", "S_infinity"]
    got = []
    for r0 in radii:
        traj = integrate_rmcf(profile21, FlowConfig(mode="rmcf", r0=r0, T=1.0))
        got.append(traj.target)
        assert traj.T_prime_ode < traj.T
    stat = integrate_rmcf(profile21, FlowConfig(mode="rmcf", r0=r1, T=1.0))
    # R is the self-similar-frame radius; |log(R/r1)| over sigma in [0, 20]
    assert stat.sigma[-1] >= 20.0
    drift = float(np.max(np.abs(np.log(stat.R / r1))))
    ok = (got == want and stat.target == "Stationary"
          and stat.T_prime_ode == stat.T and drift < 1e-6)
    _report(5, ok, f"targets {got}, stationary drift {drift:.2e}, "
                   f"T' = T at r1: {stat.T_prime_ode == stat.T}")


def test_criterion_06_maximal_time_crosscheck(profile21):
    crit = find_critical_radii(profile21)
    r1, r2 = crit.r1, crit.r2
    worst = 0.0
    cases = [("rmcf", r) for r in (0.5 * r1, 0.9 * r1, 1.1 * r1,
                                   0.5 * (r1 + r2), r2, 2.0 * r2)]
    cases += [("mcf", r) for r in (0.9 * r2, 1.1 * r2)]
    for mode, r0 in cases:
        cfg = FlowConfig(mode=mode, r0=r0, T=1.0)
        traj = integrate_rmcf(profile21, cfg) if mode == "rmcf" \
            else integrate_mcf(profile21, cfg)
        worst = max(worst, abs(traj.T_prime_ode / traj.T_prime_quadrature - 1.0))
        assert traj.T_prime_quadrature == pytest.approx(
            maximal_time_closed_form(profile21, cfg), rel=1e-12)
    ok = worst < 1e-6
    _report(6, ok, f"worst ODE-vs-quadrature T' disagreement {worst:.2e}")


def test_criterion_07_type_one(profile21):
    crit = find_critical_radii(profile21)
    stat = integrate_rmcf(profile21, FlowConfig(mode="rmcf", r0=crit.r1, T=1.0))
    prod = (stat.T - stat.t) * stat.A2
    spread = float(np.max(prod) - np.min(prod))
    W1 = profile21.W_of_s(2.0 * math.log(crit.r1))
    a2_half = float(second_fundamental_norm2(
        profile21, W1, profile21.V_of_W(W1))) / 2.0
    const_err = float(np.max(np.abs(prod - a2_half)))
    worst_drift = 0.0
    for mode, r0 in (("rmcf", 0.5 * crit.r1), ("rmcf", 2.0 * crit.r2),
                     ("mcf", 0.9 * crit.r2), ("mcf", 1.1 * crit.r2)):
        sups = []
        for samples in (64, 128):
            cfg = FlowConfig(mode=mode, r0=r0, T=1.0, samples=samples)
            traj = integrate_rmcf(profile21, cfg) if mode == "rmcf" \
                else integrate_mcf(profile21, cfg)
            assert math.isfinite(traj.typeI_constant)
            sups.append(traj.typeI_constant)
        worst_drift = max(worst_drift, abs(sups[1] / sups[0] - 1.0))
    ok = spread < 1e-8 and const_err < 1e-8 and worst_drift < 0.05
    _report(7, ok, f"stationary product spread {spread:.2e}, "
                   f"|product - |A(r1)|^2/2| = {const_err:.2e}, "
                   f"refinement drift {100 * worst_drift:.2f}%")


def test_criterion_08_mcf_bifurcation(profile21):
    crit = find_critical_radii(profile21)
    stat = integrate_mcf(profile21, FlowConfig(mode="mcf", r0=crit.r2))
    h_err = float(np.max(np.abs(stat.h - 1.0)))
    lo = integrate_mcf(profile21, FlowConfig(mode="mcf", r0=0.9 * crit.r2))
    hi = integrate_mcf(profile21, FlowConfig(mode="mcf", r0=1.1 * crit.r2))
    ok = (stat.target == "Stationary" and stat.t[-1] >= 10.0 and h_err < 1e-8
          and lo.target == "S0" and math.isfinite(lo.T_prime_ode)
          and hi.target == "S_infinity" and math.isfinite(hi.T_prime_ode)
          and math.isfinite(lo.typeI_constant)
          and math.isfinite(hi.typeI_constant))
    _report(8, ok, f"stationary |h-1| = {h_err:.2e} over t in [0, 10], "
                   f"targets {lo.target}/{hi.target}, "
                   f"T' = {lo.T_prime_ode:.6f}/{hi.T_prime_ode:.6f}")


def test_criterion_09_dual_integrator(profile21):
    from lensflow.validation import _h_crosscheck

    crit = find_critical_radii(profile21)
    c, T = profile21.c, 1.0
    worst_mid = 0.0
    for r0 in (0.9 * crit.r1, 1.1 * crit.r1):
        cfg = FlowConfig(mode="rmcf", r0=r0, T=T)
        # max deviation on a dense grid out to 0.99 T' dominates mid-life
        worst_mid = max(worst_mid, _h_crosscheck(profile21, cfg))
    cfg1 = FlowConfig(mode="rmcf", r0=crit.r1, T=T)
    t, h = brute_force_h_ode(profile21, cfg1)
    exact_err = float(np.max(np.abs(h / (1.0 - t / T) ** (c / 2.0) - 1.0)))
    ok = worst_mid < 1e-8 and exact_err < 1e-8
    _report(9, ok, f"mid-life deviation {worst_mid:.2e}, "
                   f"stationary closed-form error {exact_err:.2e}")


def test_criterion_10_gauge_invariance(profile21):
    p = profile21.params
    shifted = build_profile(SolitonParams(n=p.n, k=p.k, gauge_W=p.n + 0.5 * p.k))
    crit_a = find_critical_radii(profile21)
    crit_b = find_critical_radii(shifted)
    rho = crit_b.r1 / crit_a.r1
    errs = [abs(shifted.c / profile21.c - 1.0),
            abs((crit_b.r2 / crit_b.r1) / (crit_a.r2 / crit_a.r1) - 1.0)]
    for r in (0.5 * crit_a.r1, crit_a.r2, 2.0 * crit_a.r2):
        errs.append(abs(float(lambda_of_radius(shifted, rho * r))
                        / float(lambda_of_radius(profile21, r)) - 1.0))
    for mode, r0 in (("rmcf", 0.9 * crit_a.r1), ("rmcf", 2.0 * crit_a.r2),
                     ("mcf", 1.1 * crit_a.r2)):
        Ta = maximal_time_closed_form(profile21, FlowConfig(mode=mode, r0=r0))
        Tb = maximal_time_closed_form(shifted, FlowConfig(mode=mode, r0=rho * r0))
        errs.append(abs(Tb / Ta - 1.0))
    worst = max(errs)
    ok = worst < 1e-8
    _report(10, ok, f"worst relative change under gauge shift {worst:.2e}")


_EXPECTED_RMCF = {
    "maximal_time": ["T' < T", "T' = T", "T' < T", "T' < T", "T' < T"],
    "collapse_to": ["S0", "S0", "S_infinity", "S_infinity", "S_infinity"],
    "blow_up_rate": ["Type I"] * 5,
}
_EXPECTED_MCF = {
    "maximal_time": ["T' < infinity"] * 3 + ["T' = infinity", "T' < infinity"],
    "collapse_to": ["S0", "S0", "S0", "---", "S_infinity"],
    "blow_up_rate": ["Type I"] * 3 + ["---", "Type I"],
}


def test_criterion_11_table1(profiles):
    mismatches = []
    for nk, prof in profiles.items():
        report = table1_report(prof)
        for mode, expected in (("rmcf", _EXPECTED_RMCF), ("mcf", _EXPECTED_MCF)):
            for key, cells in expected.items():
                got = [row[mode][key] for row in report["rows"]]
                if got != cells:
                    mismatches.append((nk, mode, key, got))
    ok = not mismatches
    _report(11, ok, f"{len(MATRIX)} (n,k) pairs, both panels cell-for-cell"
            + ("" if ok else f"; mismatches: {mismatches}"))
