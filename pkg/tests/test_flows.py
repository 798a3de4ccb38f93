import math

import numpy as np
import pytest

from lensflow import (
    DomainError,
    FlowConfig,
    find_critical_radii,
    integrate_mcf,
    integrate_rmcf,
    maximal_time_closed_form,
    second_fundamental_norm2,
    type_one_rate,
)

# blow-up times frozen from a 50-digit arbitrary-precision rerun, T = 1
GOLDEN_TPRIME_RMCF_21 = {
    0.5: 0.6428687075716451,   # key: multiple of r1 (or r2, below)
    0.9: 0.9841661886372947,
    1.1: 0.9889511348955260,
}
GOLDEN_TPRIME_RMCF_21_2R2 = 0.3677689436901737
GOLDEN_TPRIME_MCF_21 = {0.9: 2.3308230012013673, 1.1: 1.4197392168243417}


def test_config_validation():
    with pytest.raises(DomainError):
        FlowConfig(mode="bogus", r0=1.0)
    with pytest.raises(DomainError):
        FlowConfig(mode="rmcf", r0=-1.0)
    with pytest.raises(DomainError):
        FlowConfig(mode="rmcf", r0=1.0, samples=2)
    with pytest.raises(DomainError):
        FlowConfig(mode="rmcf", r0=1.0, x_escape=0.1).escape_offset(1)


def test_rmcf_golden_blowup_times(profile21):
    crit = find_critical_radii(profile21)
    for mult, expected in GOLDEN_TPRIME_RMCF_21.items():
        traj = integrate_rmcf(profile21, FlowConfig(mode="rmcf", r0=mult * crit.r1))
        assert traj.T_prime_ode == pytest.approx(expected, rel=1e-8)
    traj = integrate_rmcf(profile21, FlowConfig(mode="rmcf", r0=2.0 * crit.r2))
    assert traj.T_prime_ode == pytest.approx(GOLDEN_TPRIME_RMCF_21_2R2, rel=1e-8)


def test_mcf_golden_blowup_times(profile21):
    crit = find_critical_radii(profile21)
    for mult, expected in GOLDEN_TPRIME_MCF_21.items():
        traj = integrate_mcf(profile21, FlowConfig(mode="mcf", r0=mult * crit.r2))
        assert traj.T_prime_ode == pytest.approx(expected, rel=1e-8)


def test_rmcf_classification_matrix(profiles):
    for prof in profiles.values():
        crit = find_critical_radii(prof)
        targets = []
        for r0 in (0.5 * crit.r1, 1.1 * crit.r1, 2.0 * crit.r2):
            traj = integrate_rmcf(prof, FlowConfig(mode="rmcf", r0=r0))
            targets.append(traj.target)
            assert traj.T_prime_ode < traj.T
        assert targets == ["S0", "S_infinity", "S_infinity"]


def test_rmcf_stationary_branch(profile21):
    crit = find_critical_radii(profile21)
    traj = integrate_rmcf(profile21, FlowConfig(mode="rmcf", r0=crit.r1))
    assert traj.target == "Stationary"
    assert traj.T_prime_ode == traj.T
    # the orbit rides the homothety: constant in the self-similar frame
    assert np.max(np.abs(traj.R - crit.r1)) < 1e-12
    # h = (1 - t/T)^{c/2}; compare in logs to dodge cancellation near T
    assert np.max(np.abs(np.log(traj.h) + profile21.c * traj.sigma / 2.0)) < 1e-12
    # (T - t) |A|^2 is the constant |A(r1)|^2 / 2
    W1 = profile21.W_of_s(2.0 * math.log(crit.r1))
    a2 = float(second_fundamental_norm2(profile21, W1, profile21.V_of_W(W1)))
    prod = (traj.T - traj.t) * traj.A2
    assert np.max(np.abs(prod - a2 / 2.0)) < 1e-12


def test_mcf_stationary_branch(profile21):
    crit = find_critical_radii(profile21)
    traj = integrate_mcf(profile21, FlowConfig(mode="mcf", r0=crit.r2))
    assert traj.target == "Stationary"
    assert math.isinf(traj.T_prime_ode)
    assert np.max(np.abs(traj.h - 1.0)) < 1e-12
    with pytest.raises(DomainError):
        type_one_rate(traj, profile21)


def test_quadrature_crosscheck(profile21):
    crit = find_critical_radii(profile21)
    for mode, r0 in (("rmcf", 0.7 * crit.r1), ("rmcf", 1.3 * crit.r2),
                     ("mcf", 0.8 * crit.r2), ("mcf", 1.4 * crit.r2)):
        cfg = FlowConfig(mode=mode, r0=r0)
        traj = integrate_rmcf(profile21, cfg) if mode == "rmcf" \
            else integrate_mcf(profile21, cfg)
        assert traj.T_prime_ode == pytest.approx(traj.T_prime_quadrature, rel=1e-6)
        assert traj.T_prime_quadrature == pytest.approx(
            maximal_time_closed_form(profile21, cfg), rel=1e-12)


def test_type_one_products_bounded(profile21):
    crit = find_critical_radii(profile21)
    for mode, r0 in (("rmcf", 0.6 * crit.r1), ("mcf", 1.2 * crit.r2)):
        cfg = FlowConfig(mode=mode, r0=r0)
        traj = integrate_rmcf(profile21, cfg) if mode == "rmcf" \
            else integrate_mcf(profile21, cfg)
        rate = type_one_rate(traj, profile21)
        assert math.isfinite(rate) and rate > 0.0
        # near blow-up the curvature product settles at 1/2
        assert rate == pytest.approx(0.5, rel=1e-3)


def test_sample_grid_shape(profile21):
    cfg = FlowConfig(mode="rmcf", r0=0.5, samples=32)
    traj = integrate_rmcf(profile21, cfg)
    assert len(traj.t) == 32
    assert traj.t[0] == 0.0
    assert np.all(np.diff(traj.t) > 0.0)
    assert np.all(traj.t < traj.T_prime_ode)
