"""Exact steady-state observables: closed forms, quadrature and residue routes."""
import math

import numpy as np
import pytest

from rotorlab.exact import (
    Method,
    NoRootInBracketError,
    QuadratureConfig,
    ResidueConfig,
    ResidueDegenerateError,
    angular_momentum_classical,
    angular_momentum_quantum,
    arrest_frequency,
    cutoff_frequency,
    drive_response,
    driven_angular_momentum,
    heat_rates,
    heat_transfer_difference,
    integrate_even_kernel,
    intrinsic_angular_momentum,
    moment_of_inertia,
    noise_torque,
    noise_torque_quantum,
    overdamped_friction_torque,
    position_covariance,
    potential_torque,
    residue_series_sum,
    steady_state_report,
    work_rate,
)
from rotorlab.model import BathPair, DriveSpec, NoiseModel, RotorParams, build_coefficients

BASE = RotorParams(u1=1.0, u2=0.25, alpha=math.pi / 4)
BATHS = BathPair(T1=2.0, T2=5.0)


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(cutoff_factor=5.0)
    with pytest.raises(ValueError):
        ResidueConfig(max_matsubara=0)


def test_integrate_even_kernel_lorentzian():
    # integral of 1/(1+w^2) over the line is pi, so dw/2pi gives 1/2
    val = integrate_even_kernel(lambda w: 1.0 / (1.0 + w * w),
                                omega_max=100.0, omega_scale=1.0)
    assert val == pytest.approx(0.5, rel=1e-10)


def test_integrate_even_kernel_gaussian():
    val = integrate_even_kernel(lambda w: math.exp(-w * w),
                                omega_max=30.0, omega_scale=1.0)
    assert val == pytest.approx(math.sqrt(math.pi) / (2 * math.pi), rel=1e-12)


def test_classical_closed_form_value():
    assert angular_momentum_classical(BASE, BATHS) == pytest.approx(
        72.0 / 49.0, rel=1e-12
    )


def test_classical_sign_and_nulls():
    assert angular_momentum_classical(BASE, BathPair(T1=5.0, T2=2.0)) < 0
    assert angular_momentum_classical(BASE, BathPair(T1=3.0, T2=3.0)) == 0.0
    iso = RotorParams(u1=1.0, u2=1.0, alpha=0.7)
    assert angular_momentum_classical(iso, BATHS) == 0.0
    axis = RotorParams(u1=1.0, u2=0.25, alpha=0.0)
    assert angular_momentum_classical(axis, BATHS) == 0.0


def test_overdamped_limit():
    assert overdamped_friction_torque(BASE, BATHS) == pytest.approx(1.8, rel=1e-12)
    small_m = RotorParams(u1=1.0, u2=0.25, alpha=math.pi / 4, m=1e-8)
    approx = (small_m.eta / small_m.m) * angular_momentum_classical(small_m, BATHS)
    assert approx == pytest.approx(1.8, rel=1e-6)


def test_classical_matches_quadrature_of_classical_integrand():
    # independent oracle: brute-force trapezoid of the hbar = 0 spectral integral
    p = BASE
    c = build_coefficients(p)
    w = np.linspace(-400.0, 400.0, 4_000_001)
    s = p.m * w**2 + 1j * w * p.eta
    z = (c.A - s) * (c.B - s) - c.C**2
    integrand = -4.0 * p.m * p.eta**2 * c.C * (BATHS.T1 - BATHS.T2) * w**2 / np.abs(z) ** 2
    val = np.trapezoid(integrand, w) / (2.0 * math.pi)
    assert angular_momentum_classical(p, BATHS) == pytest.approx(val, rel=1e-6)


def test_quantum_quadrature_vs_residues():
    for theta in (0.3, 1.0, 4.0):
        baths = BathPair(T1=2.0 * theta, T2=5.0 * theta)
        lq = angular_momentum_quantum(BASE, baths)
        lr = angular_momentum_quantum(BASE, baths, method=Method.RESIDUES)
        assert lr == pytest.approx(lq, rel=1e-8)
        mq = noise_torque_quantum(BASE, baths)
        mr = noise_torque_quantum(BASE, baths, method=Method.RESIDUES)
        assert mr == pytest.approx(mq, rel=1e-8)


def test_residue_series_direct_interface():
    lq = angular_momentum_quantum(BASE, BATHS)
    assert residue_series_sum("L0", BASE, BATHS) == pytest.approx(lq, rel=1e-8)
    with pytest.raises(ValueError):
        residue_series_sum("bogus", BASE, BATHS)


def test_residue_route_rejects_pole_on_thermal_tower():
    # engineered collision: overdamped mode pole at 0.5i on top of the first
    # Matsubara frequency 2 pi T1
    p = RotorParams(u1=0.75, u2=0.25, alpha=0.5, eta=2.0)
    baths = BathPair(T1=0.5 / (2.0 * math.pi), T2=1.0)
    with pytest.raises(ResidueDegenerateError):
        residue_series_sum("L0", p, baths)


def test_equilibrium_and_symmetry_nulls():
    eq = BathPair(T1=3.0, T2=3.0)
    assert intrinsic_angular_momentum(BASE, eq) == 0.0
    assert noise_torque(BASE, eq) == 0.0
    assert heat_transfer_difference(BASE, eq) == 0.0
    aligned = RotorParams(u1=1.0, u2=0.25, alpha=0.0)
    assert intrinsic_angular_momentum(aligned, BATHS) == 0.0
    assert noise_torque(aligned, BATHS) == 0.0


def test_intrinsic_dispatch_classical_modes():
    white = BathPair(T1=2.0, T2=5.0, model=NoiseModel.CLASSICAL_WHITE)
    assert intrinsic_angular_momentum(BASE, white) == angular_momentum_classical(BASE, BATHS)
    hbar0 = RotorParams(u1=1.0, u2=0.25, alpha=math.pi / 4, hbar=0.0)
    assert intrinsic_angular_momentum(hbar0, BATHS) == angular_momentum_classical(hbar0, BATHS)
    assert noise_torque(BASE, white) == 0.0
    assert noise_torque(hbar0, BATHS) == 0.0


def test_quantum_value_reduces_towards_classical():
    ratios = []
    for theta in (1.0, 10.0, 100.0):
        baths = BathPair(T1=2.0 * theta, T2=5.0 * theta)
        ratios.append(
            angular_momentum_quantum(BASE, baths)
            / angular_momentum_classical(BASE, baths)
        )
    assert ratios[0] < ratios[1] < ratios[2] < 1.0
    assert ratios[2] == pytest.approx(1.0, abs=1e-4)


def test_noise_torque_opposes_angular_momentum():
    for theta in (0.2, 1.0, 5.0):
        baths = BathPair(T1=2.0 * theta, T2=5.0 * theta)
        l0 = angular_momentum_quantum(BASE, baths)
        m_xi = noise_torque_quantum(BASE, baths)
        assert l0 > 0
        assert m_xi < 0


def test_torque_balance():
    # steady state: potential torque + friction torque + noise torque = 0
    for baths in (BATHS, BathPair(T1=0.2, T2=0.5)):
        l0 = angular_momentum_quantum(BASE, baths)
        m_xi = noise_torque_quantum(BASE, baths)
        pot = potential_torque(BASE, baths)
        resid = -pot - (BASE.eta / BASE.m) * l0 + m_xi
        assert abs(resid) < 1e-10 * max(abs(pot), abs(l0))


def test_position_covariance_equilibrium_equipartition():
    # classical equal temperatures: <x_i x_j> = T (U^-1)_ij
    p = RotorParams(u1=1.0, u2=0.25, alpha=0.6, hbar=0.0)
    baths = BathPair(T1=3.0, T2=3.0)
    c = build_coefficients(p)
    x1sq, x2sq, x1x2 = position_covariance(p, baths)
    det = c.A * c.B - c.C**2
    assert x1sq == pytest.approx(3.0 * c.B / det, rel=1e-9)
    assert x2sq == pytest.approx(3.0 * c.A / det, rel=1e-9)
    assert x1x2 == pytest.approx(-3.0 * c.C / det, rel=1e-9)


def test_drive_response_even_and_driven_momentum_odd():
    rng = np.random.default_rng(5)
    for w0 in rng.uniform(0.1, 4.0, size=8):
        assert drive_response(w0, BASE) == pytest.approx(drive_response(-w0, BASE), rel=1e-12)
        lp, dp = driven_angular_momentum(BASE, BATHS, DriveSpec(D=1.0, omega0=w0))
        lm, dm = driven_angular_momentum(BASE, BATHS, DriveSpec(D=1.0, omega0=-w0))
        assert dp == pytest.approx(-dm, rel=1e-12)
        assert lp + lm == pytest.approx(2.0 * (lp - dp), rel=1e-9)


def test_work_rate_nonnegative_and_even():
    rng = np.random.default_rng(6)
    for w0 in rng.uniform(-5.0, 5.0, size=20):
        r = work_rate(BASE, DriveSpec(D=1.5, omega0=w0))
        assert r >= 0.0
        assert r == pytest.approx(work_rate(BASE, DriveSpec(D=1.5, omega0=-w0)), rel=1e-12)
    assert work_rate(BASE, DriveSpec(D=0.0, omega0=1.0)) == 0.0
    assert work_rate(BASE, DriveSpec(D=1.0, omega0=0.0)) == 0.0


def test_energy_balance_and_heat_identity():
    drive = DriveSpec(D=1.2, omega0=0.8)
    r_q1, r_q2 = heat_rates(BASE, BATHS, drive)
    r_w = work_rate(BASE, drive)
    assert r_q1 + r_q2 + r_w == pytest.approx(0.0, abs=1e-12 * abs(r_w))
    delta = heat_transfer_difference(BASE, BATHS, drive)
    assert delta == pytest.approx(r_q1 - r_q2, rel=1e-9)


def test_cold_bath_cannot_be_pumped():
    # T2 > T1: the cold reservoir only absorbs heat, for any drive
    rng = np.random.default_rng(7)
    for _ in range(10):
        drive = DriveSpec(D=rng.uniform(0, 3), omega0=rng.uniform(-4, 4))
        r_q1, _ = heat_rates(BASE, BATHS, drive)
        assert r_q1 <= 1e-14


def test_arrest_frequency_cancels_momentum():
    w_star = arrest_frequency(BASE, BATHS, D=2.0)
    l_total, _ = driven_angular_momentum(BASE, BATHS, DriveSpec(D=2.0, omega0=w_star))
    l0 = intrinsic_angular_momentum(BASE, BATHS)
    assert abs(l_total) < 1e-9 * abs(l0)


def test_arrest_frequency_no_root_for_weak_drive():
    # D = 1 cannot generate enough counter-momentum at these parameters
    with pytest.raises(NoRootInBracketError):
        arrest_frequency(BASE, BATHS, D=1.0)
    with pytest.raises(ValueError):
        arrest_frequency(BASE, BATHS, D=0.0)


def test_moment_of_inertia_positive_and_additive():
    i0, i_drive = moment_of_inertia(BASE, BATHS, DriveSpec(D=1.0, omega0=1.0))
    assert i0 > 0
    assert i_drive > 0
    i0_again, i_none = moment_of_inertia(BASE, BATHS)
    assert i_none == 0.0
    assert i0_again == pytest.approx(i0, rel=1e-12)


def test_steady_state_report_consistency():
    drive = DriveSpec(D=1.0, omega0=0.7)
    rep = steady_state_report(BASE, BATHS, drive)
    assert rep.delta_rq == pytest.approx(rep.r_q1 - rep.r_q2, rel=1e-9)
    assert rep.r_q1 + rep.r_q2 + rep.r_w == pytest.approx(0.0, abs=1e-9 * abs(rep.r_w))
    assert rep.L0 == pytest.approx(angular_momentum_quantum(BASE, BATHS), rel=1e-12)
    assert rep.L0_classical == pytest.approx(angular_momentum_classical(BASE, BATHS), rel=1e-12)
    assert rep.I0 > 0 and rep.I_drive > 0


def test_cutoff_frequency_covers_thermal_scale():
    cfg = QuadratureConfig()
    wc = cutoff_frequency(BASE, BATHS, cfg)
    assert wc >= cfg.cutoff_factor * 2.0 * math.pi * 5.0 * (1.0 - 1e-12)
