"""Potential coefficients, response denominator and spectral kernels."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotorlab.model import (
    BathPair,
    DriveSpec,
    NoiseModel,
    RotorParams,
    StabilityError,
    bath_psd,
    build_coefficients,
    greens_functions,
    response_denominator,
    thermal_kernel,
)

positive = st.floats(min_value=1e-3, max_value=1e3)
angles = st.floats(min_value=-10.0, max_value=10.0)


def test_params_validation():
    with pytest.raises(StabilityError):
        RotorParams(u1=0.0, u2=1.0, alpha=0.0)
    with pytest.raises(StabilityError):
        RotorParams(u1=1.0, u2=-0.5, alpha=0.0)
    with pytest.raises(ValueError):
        RotorParams(u1=1.0, u2=1.0, alpha=0.0, m=0.0)
    with pytest.raises(ValueError):
        RotorParams(u1=1.0, u2=1.0, alpha=0.0, eta=-1.0)
    with pytest.raises(ValueError):
        RotorParams(u1=1.0, u2=1.0, alpha=0.0, hbar=-1.0)
    with pytest.raises(ValueError):
        BathPair(T1=-1.0, T2=1.0)
    with pytest.raises(ValueError):
        DriveSpec(D=-1.0)


def test_quantum_baths_require_hbar():
    params = RotorParams(u1=1.0, u2=0.25, alpha=0.0, hbar=0.0)
    baths = BathPair(T1=1.0, T2=2.0, model=NoiseModel.QUANTUM_COLORED)
    with pytest.raises(ValueError):
        baths.require_quantum(params)
    BathPair(T1=1.0, T2=2.0, model=NoiseModel.CLASSICAL_WHITE).require_quantum(params)


@given(u1=positive, u2=positive, alpha=angles)
@settings(max_examples=200, deadline=None)
def test_coefficient_invariants(u1, u2, alpha):
    p = RotorParams(u1=u1, u2=u2, alpha=alpha)
    c = build_coefficients(p)
    assert c.A + c.B == pytest.approx(u1 + u2, rel=1e-12)
    assert c.A - c.B == pytest.approx((u1 - u2) * math.cos(2 * alpha), rel=1e-9, abs=1e-9 * (u1 + u2))
    assert c.A * c.B - c.C**2 == pytest.approx(u1 * u2, rel=1e-9)


def test_coefficients_special_angles():
    p0 = RotorParams(u1=1.0, u2=0.25, alpha=0.0)
    c0 = build_coefficients(p0)
    assert (c0.A, c0.B, c0.C) == (1.0, 0.25, 0.0)
    p45 = RotorParams(u1=1.0, u2=0.25, alpha=math.pi / 4)
    c45 = build_coefficients(p45)
    assert c45.A == pytest.approx(0.625)
    assert c45.B == pytest.approx(0.625)
    assert c45.C == pytest.approx(0.375)


@given(u1=positive, u2=positive, alpha=angles,
       omega=st.floats(min_value=-50.0, max_value=50.0))
@settings(max_examples=200, deadline=None)
def test_denominator_factorization_and_symmetry(u1, u2, alpha, omega):
    p = RotorParams(u1=u1, u2=u2, alpha=alpha)
    c = build_coefficients(p)
    z = response_denominator(omega, p, c)
    s = p.m * omega**2 + 1j * omega * p.eta
    # Z factorizes through the normal modes, independent of alpha
    expected = (s - u1) * (s - u2)
    assert z == pytest.approx(expected, rel=1e-10, abs=1e-10)
    assert response_denominator(-omega, p, c) == pytest.approx(np.conj(z), rel=1e-12)


def test_denominator_has_no_real_zeros():
    p = RotorParams(u1=1.0, u2=0.25, alpha=0.3)
    c = build_coefficients(p)
    w = np.linspace(-20, 20, 20001)
    assert np.abs(response_denominator(w, p, c)).min() > 1e-4


def test_greens_functions_invert_dynamics():
    p = RotorParams(u1=1.0, u2=0.25, alpha=0.6, m=1.3, eta=0.7)
    c = build_coefficients(p)
    for w in (0.0, 0.37, -2.1, 5.0):
        k1, k2, l1, l2 = greens_functions(w, p, c)
        g = np.array([[k1, k2], [l1, l2]])
        s = p.m * w**2 + 1j * w * p.eta
        d = np.array([[c.A - s, c.C], [c.C, c.B - s]])
        assert np.allclose(d @ g, np.eye(2), atol=1e-12)
        assert k2 == l1


def test_thermal_kernel_properties():
    w = np.linspace(-30, 30, 1001)
    g = thermal_kernel(w, 2.0, 5.0, 1.0)
    assert np.allclose(g, thermal_kernel(-w, 2.0, 5.0, 1.0))
    assert np.allclose(g, -np.asarray(thermal_kernel(w, 5.0, 2.0, 1.0)))
    assert thermal_kernel(0.0, 2.0, 5.0, 1.0) == pytest.approx(-3.0, rel=1e-12)
    assert np.all(np.asarray(thermal_kernel(w, 2.0, 2.0, 1.0)) == 0.0)
    # classical limit is flat at T1 - T2
    assert np.allclose(thermal_kernel(w, 2.0, 5.0, 0.0), -3.0)


def test_thermal_kernel_series_branch_matches_direct():
    # just inside the Taylor branch the direct formula is still well
    # conditioned, so both evaluations must agree to rounding
    T = 2.0
    for x in (0.99e-4, 0.5e-4, 1e-6):
        w = x * 2.0 * T
        got = float(np.asarray(bath_psd(w, T, 1.0, 1.0)))
        direct = 2.0 * 0.5 * w / math.tanh(x)
        assert got == pytest.approx(direct, rel=1e-12)


def test_bath_psd_limits():
    w = np.linspace(-40, 40, 801)
    s = np.asarray(bath_psd(w, 2.0, 1.5, 1.0))
    assert np.all(s > 0)
    assert np.allclose(s, bath_psd(-w, 2.0, 1.5, 1.0))
    assert bath_psd(0.0, 2.0, 1.5, 1.0) == pytest.approx(2 * 1.5 * 2.0, rel=1e-12)
    # zero-temperature spectrum is the zero-point line eta hbar |w|
    s0 = np.asarray(bath_psd(w, 0.0, 1.5, 1.0))
    assert np.allclose(s0, 1.5 * np.abs(w))
    # hbar = 0 recovers the white level 2 eta T
    assert np.allclose(bath_psd(w, 2.0, 1.5, 0.0), 2 * 1.5 * 2.0)
    # high-frequency growth approaches the zero-point line from above
    tail = np.asarray(bath_psd(40.0, 2.0, 1.5, 1.0))
    assert tail == pytest.approx(1.5 * 40.0, rel=1e-6)
