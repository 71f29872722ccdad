"""Physical parameters, potential coefficients, response functions and spectral kernels.

Everything here is a pure function of immutable inputs; all other modules build
on this vocabulary. Units: k_B = 1 throughout; hbar, m, eta are explicit and
default to 1. hbar = 0 is legal and selects the classical limit of every
kernel analytically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "StabilityError",
    "NoiseModel",
    "RotorParams",
    "PotentialCoefficients",
    "BathPair",
    "DriveSpec",
    "build_coefficients",
    "response_denominator",
    "greens_functions",
    "thermal_kernel",
    "bath_psd",
]

# Relative half-width of the Taylor branch around the removable omega = 0
# singularity of the coth kernels.
_SERIES_CUT = 1e-4


class StabilityError(ValueError):
    """Potential parameters violate mechanical stability (u1, u2 must be > 0)."""


class NoiseModel(Enum):
    QUANTUM_COLORED = "quantum-colored"
    CLASSICAL_WHITE = "classical-white"


@dataclass(frozen=True)
class RotorParams:
    """Rotor mass, Ohmic friction, hbar and the rotated-potential parameters."""

    u1: float
    u2: float
    alpha: float
    m: float = 1.0
    eta: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.u1 <= 0 or self.u2 <= 0:
            raise StabilityError(
                f"anisotropies must be positive for mechanical stability, "
                f"got u1={self.u1}, u2={self.u2}"
            )
        if self.m <= 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if self.eta <= 0:
            raise ValueError(f"friction must be positive, got {self.eta}")
        if self.hbar < 0:
            raise ValueError(f"hbar must be nonnegative, got {self.hbar}")


@dataclass(frozen=True)
class PotentialCoefficients:
    """Quadratic-form coefficients U = A x1^2/2 + B x2^2/2 + C x1 x2."""

    A: float
    B: float
    C: float


@dataclass(frozen=True)
class BathPair:
    """Temperatures of the two reservoirs and the noise model driving them."""

    T1: float
    T2: float
    model: NoiseModel = NoiseModel.QUANTUM_COLORED

    def __post_init__(self):
        if self.T1 < 0 or self.T2 < 0:
            raise ValueError(f"temperatures must be nonnegative, got {self.T1}, {self.T2}")

    def require_quantum(self, params: RotorParams) -> None:
        if self.model is NoiseModel.QUANTUM_COLORED and params.hbar <= 0:
            raise ValueError("quantum-colored baths require hbar > 0")


@dataclass(frozen=True)
class DriveSpec:
    """Circular drive f(t) = D (cos w0 t, sin w0 t); w0 may be negative."""

    D: float = 0.0
    omega0: float = 0.0

    def __post_init__(self):
        if self.D < 0:
            raise ValueError(f"drive amplitude must be nonnegative, got {self.D}")


def build_coefficients(params: RotorParams) -> PotentialCoefficients:
    """Coefficients of the rotated anisotropic potential.

    Satisfies A + B = u1 + u2, A - B = (u1 - u2) cos 2a, A B - C^2 = u1 u2.
    """
    u1, u2, a = params.u1, params.u2, params.alpha
    ca, sa = math.cos(a), math.sin(a)
    return PotentialCoefficients(
        A=u1 * ca * ca + u2 * sa * sa,
        B=u2 * ca * ca + u1 * sa * sa,
        C=0.5 * (u1 - u2) * math.sin(2.0 * a),
    )


def response_denominator(omega, params: RotorParams, coeffs: PotentialCoefficients):
    """Z(w) = (A - m w^2 - i w eta)(B - m w^2 - i w eta) - C^2.

    Accepts scalar or array omega, real or complex; Z(-w) = conj(Z(w)) on the
    real axis. eta > 0 guarantees no real zeros.
    """
    omega = np.asarray(omega)
    s = params.m * omega**2 + 1j * omega * params.eta
    z = (coeffs.A - s) * (coeffs.B - s) - coeffs.C**2
    return z if z.shape else complex(z)


def greens_functions(omega, params: RotorParams, coeffs: PotentialCoefficients):
    """Frequency-domain Green's functions (K1, K2, L1, L2) of the coupled pair.

    K1 = (B - m w^2 - i w eta)/Z, K2 = L1 = -C/Z, L2 = (A - m w^2 - i w eta)/Z.
    """
    omega = np.asarray(omega)
    s = params.m * omega**2 + 1j * omega * params.eta
    z = (coeffs.A - s) * (coeffs.B - s) - coeffs.C**2
    k1 = (coeffs.B - s) / z
    l2 = (coeffs.A - s) / z
    cross = -coeffs.C / z
    return k1, cross, cross, l2


def _half_hw_coth(omega, T: float, hbar: float):
    """(hbar w / 2) coth(hbar w / 2 T) with its removable limits.

    T = 0 gives the zero-point value hbar |w| / 2; hbar = 0 gives T. The
    |hbar w / 2 T| < 1e-4 region uses the Taylor branch to avoid 0/0 at the
    quadrature origin.
    """
    if hbar == 0.0:
        return np.full_like(np.asarray(omega, dtype=float), T, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if T == 0.0:
        return 0.5 * hbar * np.abs(omega)
    x = 0.5 * hbar * omega / T
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, x, 0.0)
    xl = np.where(small, 1.0, x)
    series = T * (1.0 + xs * xs / 3.0 - xs**4 / 45.0)
    direct = 0.5 * hbar * omega / np.tanh(xl)
    return np.where(small, series, direct)


def thermal_kernel(omega, T1: float, T2: float, hbar: float):
    """G(w) = (hbar w / 2)[coth(hbar w/2 T1) - coth(hbar w/2 T2)].

    Even in w, antisymmetric under T1 <-> T2, and G(0) = T1 - T2. Identically
    zero when T1 = T2.
    """
    g = _half_hw_coth(omega, T1, hbar) - _half_hw_coth(omega, T2, hbar)
    g = np.asarray(g)
    return g if g.shape else float(g)


def bath_psd(omega, T: float, eta: float, hbar: float):
    """Symmetrized noise spectrum S(w) = eta hbar w coth(hbar w / 2 T).

    Even, nonnegative, S(0) = 2 eta T; grows linearly (zero-point) for
    hbar |w| >> T, and reduces to the white value 2 eta T at hbar = 0.
    """
    s = 2.0 * eta * _half_hw_coth(omega, T, hbar)
    s = np.asarray(s)
    return s if s.shape else float(s)


def thermal_kernel_analytic(z: complex, T1: float, T2: float, hbar: float) -> complex:
    """G continued to complex frequency, for residue evaluation off the real axis."""
    if hbar == 0.0:
        return complex(T1 - T2)
    z = complex(z)
    out = 0.0 + 0.0j
    for sign, T in ((1.0, T1), (-1.0, T2)):
        if T == 0.0:
            # zero-point branch: coth -> sign(Re z) away from the imaginary axis
            out += sign * 0.5 * hbar * z * (1.0 if z.real >= 0 else -1.0)
        else:
            out += sign * 0.5 * hbar * z / np.tanh(0.5 * hbar * z / T)
    return out
