"""Closed-form steady-state observables, evaluated by two independent routes.

Every integral over the noise spectrum can be computed either by adaptive
panel quadrature on the real frequency axis or by closing the contour in the
upper half plane and summing residues (four response poles plus the two
thermal pole towers on the imaginary axis). The two routes share no code
beyond the kernel definitions, so their agreement is a strong correctness
check; the quadrature route is unconditionally valid, while the residue route
refuses near-degenerate pole configurations.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, optimize

from .model import (
    BathPair,
    DriveSpec,
    NoiseModel,
    PotentialCoefficients,
    RotorParams,
    bath_psd,
    build_coefficients,
    greens_functions,
    response_denominator,
    thermal_kernel,
    thermal_kernel_analytic,
)

__all__ = [
    "Method",
    "QuadratureConfig",
    "ResidueConfig",
    "SteadyStateReport",
    "TailTooFatError",
    "ResidueDegenerateError",
    "NonConvergentError",
    "NoRootInBracketError",
    "IdentityViolationError",
    "integrate_even_kernel",
    "cutoff_frequency",
    "angular_momentum_quantum",
    "angular_momentum_classical",
    "overdamped_friction_torque",
    "noise_torque_quantum",
    "intrinsic_angular_momentum",
    "noise_torque",
    "drive_response",
    "driven_angular_momentum",
    "arrest_frequency",
    "moment_of_inertia",
    "position_covariance",
    "potential_torque",
    "work_rate",
    "heat_rates",
    "heat_transfer_difference",
    "residue_series_sum",
    "steady_state_report",
]


class TailTooFatError(ArithmeticError):
    """The last quadrature panel contributes more than the relative tolerance."""


class ResidueDegenerateError(ArithmeticError):
    """Pole configuration too close to degenerate; use the quadrature route."""


class NonConvergentError(ArithmeticError):
    """Residue series tail still above tolerance at the Matsubara index cap."""


class NoRootInBracketError(ArithmeticError):
    """Arrest-frequency residual does not change sign over the search bracket."""


class IdentityViolationError(ArithmeticError):
    """Two independent evaluations of the same identity disagree."""


class Method(Enum):
    QUADRATURE = "quadrature"
    RESIDUES = "residues"


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    cutoff_factor: float = 50.0

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.cutoff_factor < 10:
            raise ValueError("cutoff_factor must be at least 10")


@dataclass(frozen=True)
class ResidueConfig:
    max_matsubara: int = 10_000
    series_rel_tol: float = 1e-10
    degeneracy_guard: float = 1e-8

    def __post_init__(self):
        if self.max_matsubara < 1:
            raise ValueError("max_matsubara must be at least 1")


@dataclass(frozen=True)
class SteadyStateReport:
    L0: float
    L0_classical: float
    M_xi: float
    I0: float
    L_drive: float
    I_drive: float
    r_w: float
    r_q1: float
    r_q2: float
    delta_rq: float


_DEFAULT_QUAD = QuadratureConfig()
_DEFAULT_RESIDUE = ResidueConfig()


# ---------------------------------------------------------------------------
# quadrature machinery


def characteristic_frequency(params: RotorParams) -> float:
    """Scale of the response structure: oscillator and damping rates."""
    return max(
        math.sqrt(params.u1 / params.m),
        math.sqrt(params.u2 / params.m),
        params.eta / params.m,
    )


def cutoff_frequency(params: RotorParams, baths: BathPair, cfg: QuadratureConfig) -> float:
    """Truncation frequency: cutoff_factor times the largest physical scale.

    Beyond the thermal scale 2 pi max(T)/hbar the kernel difference decays
    exponentially, and the response decays like w^-8, so the analytic tail
    bound is far below rel_tol for the default cutoff_factor.
    """
    scale = characteristic_frequency(params)
    if params.hbar > 0:
        scale = max(scale, 2.0 * math.pi * max(baths.T1, baths.T2) / params.hbar)
    return cfg.cutoff_factor * scale


def _panel_edges(omega_max: float, omega_scale: float) -> list[float]:
    edges = [0.0]
    w = min(omega_scale, omega_max)
    while w < omega_max:
        edges.append(w)
        w *= 2.0
    edges.append(omega_max)
    return edges


def integrate_even_kernel(
    kernel,
    cfg: QuadratureConfig = _DEFAULT_QUAD,
    omega_max: float = None,
    omega_scale: float = None,
) -> float:
    """Full-line integral (dw / 2 pi) of an even, decaying kernel.

    Evaluates 2x the adaptive panel integration on [0, omega_max] with
    geometrically widening panels starting at the structure scale, plus a
    semi-infinite closing panel so power-law tails are captured exactly.
    Raises TailTooFatError if the closing panel fails to converge relative
    to the total.
    """
    if omega_max is None:
        raise ValueError("omega_max is required (see cutoff_frequency)")
    if omega_scale is None:
        omega_scale = omega_max / cfg.cutoff_factor
    edges = _panel_edges(omega_max, omega_scale)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(
            kernel, lo, hi, epsrel=0.05 * cfg.rel_tol, epsabs=cfg.abs_tol, limit=200
        )
        total += val
    # convergence of the closing panel is judged by tail_err below, not by
    # QUADPACK's own heuristic warning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        tail, tail_err = integrate.quad(
            kernel, omega_max, np.inf, epsrel=0.05 * cfg.rel_tol, epsabs=cfg.abs_tol, limit=200
        )
    total += tail
    if tail_err > cfg.rel_tol * abs(total) + cfg.abs_tol:
        raise TailTooFatError(
            f"tail beyond {omega_max:.3e} not resolved (error {tail_err:.3e} "
            f"against total {total:.3e}); increase cutoff_factor"
        )
    return 2.0 * total / (2.0 * math.pi)


def _integrate_complex_full_line(kernel, cfg: QuadratureConfig, omega_max: float,
                                 omega_scale: float) -> complex:
    """Full-line integral (dw / 2 pi) of a complex kernel with no symmetry assumed.

    Both half lines are mapped to [0, omega_max] and the real and imaginary
    parts are integrated separately over the same panels.
    """
    edges = _panel_edges(omega_max, omega_scale)
    bounds = list(zip(edges[:-1], edges[1:])) + [(omega_max, np.inf)]
    total = 0.0 + 0.0j
    tail_err = 0.0
    for lo, hi in bounds:
        for side in (1.0, -1.0):
            for part in (np.real, np.imag):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", integrate.IntegrationWarning)
                    v, err = integrate.quad(
                        lambda w: float(part(kernel(side * w))),
                        lo, hi, epsrel=0.05 * cfg.rel_tol, epsabs=cfg.abs_tol, limit=200,
                    )
                total += v if part is np.real else 1j * v
                if hi is np.inf:
                    tail_err += err
    if tail_err > cfg.rel_tol * abs(total) + cfg.abs_tol:
        raise TailTooFatError(
            f"tail beyond {omega_max:.3e} not resolved (error {tail_err:.3e} "
            f"against total {abs(total):.3e})"
        )
    return total / (2.0 * math.pi)


# ---------------------------------------------------------------------------
# intrinsic observables


def angular_momentum_quantum(
    params: RotorParams,
    baths: BathPair,
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
    method: Method = Method.QUADRATURE,
    residue_cfg: ResidueConfig = _DEFAULT_RESIDUE,
) -> float:
    """Mean intrinsic angular momentum of the quantum-colored rotator.

    -4 m eta^2 C * integral (dw/2pi) w^2 G(w) / |Z(w)|^2. Vanishes identically
    for C = 0 or T1 = T2.
    """
    baths.require_quantum(params)
    if params.hbar <= 0:
        raise ValueError("quantum angular momentum requires hbar > 0")
    if method is Method.RESIDUES:
        return residue_series_sum("L0", params, baths, residue_cfg)
    coeffs = build_coefficients(params)
    pref = -4.0 * params.m * params.eta**2 * coeffs.C

    def kernel(w):
        z = response_denominator(w, params, coeffs)
        g = thermal_kernel(w, baths.T1, baths.T2, params.hbar)
        return w * w * float(g) / (z.real * z.real + z.imag * z.imag)

    omega_max = cutoff_frequency(params, baths, quad_cfg)
    return pref * integrate_even_kernel(
        kernel, quad_cfg, omega_max, characteristic_frequency(params)
    )


def angular_momentum_classical(params: RotorParams, baths: BathPair) -> float:
    """Classical (white-noise) mean angular momentum, in closed form.

    -2 m eta (T1 - T2)(u1 - u2) sin 2a / [m (u1 - u2)^2 + 2 eta^2 (u1 + u2)].
    """
    num = (
        -2.0 * params.m * params.eta
        * (baths.T1 - baths.T2)
        * (params.u1 - params.u2)
        * math.sin(2.0 * params.alpha)
    )
    den = params.m * (params.u1 - params.u2) ** 2 + 2.0 * params.eta**2 * (params.u1 + params.u2)
    return num / den


def overdamped_friction_torque(params: RotorParams, baths: BathPair) -> float:
    """m -> 0 limit of (eta/m) times the classical angular momentum."""
    return (
        -(baths.T1 - baths.T2)
        * (params.u1 - params.u2)
        * math.sin(2.0 * params.alpha)
        / (params.u1 + params.u2)
    )


def noise_torque_quantum(
    params: RotorParams,
    baths: BathPair,
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
    method: Method = Method.QUADRATURE,
    residue_cfg: ResidueConfig = _DEFAULT_RESIDUE,
) -> float:
    """Mean torque exerted by the bath forces: 2 C eta * integral (dw/2pi) G(w)/Z(w).

    The kernel is complex on the real line; the full complex integral is taken
    and the imaginary residual is asserted numerically zero, which doubles as a
    check on the sign conventions in Z.
    """
    baths.require_quantum(params)
    if params.hbar <= 0:
        raise ValueError("quantum noise torque requires hbar > 0")
    if method is Method.RESIDUES:
        return residue_series_sum("M_xi", params, baths, residue_cfg)
    coeffs = build_coefficients(params)
    pref = 2.0 * coeffs.C * params.eta

    def kernel(w):
        g = thermal_kernel(w, baths.T1, baths.T2, params.hbar)
        return float(g) / response_denominator(w, params, coeffs)

    omega_max = cutoff_frequency(params, baths, quad_cfg)
    val = _integrate_complex_full_line(
        kernel, quad_cfg, omega_max, characteristic_frequency(params)
    )
    if abs(val.imag) > 1e-9 * abs(val.real) + 1e-12:
        raise IdentityViolationError(
            f"noise-torque integral has nonzero imaginary part {val.imag:.3e} "
            f"(real part {val.real:.3e})"
        )
    return pref * val.real


def intrinsic_angular_momentum(
    params: RotorParams,
    baths: BathPair,
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
) -> float:
    """Mean angular momentum for whichever noise model the baths select."""
    if baths.model is NoiseModel.CLASSICAL_WHITE or params.hbar == 0:
        return angular_momentum_classical(params, baths)
    return angular_momentum_quantum(params, baths, quad_cfg)


def noise_torque(
    params: RotorParams,
    baths: BathPair,
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
) -> float:
    """Noise torque for the selected model; identically zero in the classical limit."""
    if baths.model is NoiseModel.CLASSICAL_WHITE or params.hbar == 0:
        return 0.0
    return noise_torque_quantum(params, baths, quad_cfg)


# ---------------------------------------------------------------------------
# drive response


def drive_response(omega0: float, params: RotorParams,
                   coeffs: PotentialCoefficients = None) -> float:
    """K(w0): the even response factor multiplying D^2 w0 in the driven momentum."""
    if coeffs is None:
        coeffs = build_coefficients(params)
    m = params.m
    z = response_denominator(omega0, params, coeffs)
    num = (coeffs.A - m * omega0**2) * (coeffs.B - m * omega0**2) \
        + (omega0 * params.eta) ** 2 - coeffs.C**2
    return m * num / (z.real * z.real + z.imag * z.imag)


def driven_angular_momentum(
    params: RotorParams,
    baths: BathPair,
    drive: DriveSpec,
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
) -> tuple[float, float]:
    """(L_total, L_drive): intrinsic plus the odd-in-w0 drive contribution."""
    l_drive = drive.D**2 * drive.omega0 * drive_response(drive.omega0, params)
    l0 = intrinsic_angular_momentum(params, baths, quad_cfg)
    return l0 + l_drive, l_drive


def arrest_frequency(
    params: RotorParams,
    baths: BathPair,
    D: float,
    bracket: tuple[float, float] = None,
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
) -> float:
    """Drive frequency at which the driven momentum cancels the intrinsic one.

    Solves L0 + D^2 w0 K(w0) = 0 by bisection on the bracket (default
    +-10 sqrt(max(u)/m)), scanning for a sign change first.
    """
    if D <= 0:
        raise ValueError("arrest frequency requires D > 0")
    l0 = intrinsic_angular_momentum(params, baths, quad_cfg)
    if l0 == 0.0:
        raise ValueError("intrinsic angular momentum is zero; nothing to arrest")
    if bracket is None:
        span = 10.0 * math.sqrt(max(params.u1, params.u2) / params.m)
        bracket = (-span, span)
    coeffs = build_coefficients(params)

    def residual(w0):
        return l0 + D**2 * w0 * drive_response(w0, params, coeffs)

    grid = np.linspace(bracket[0], bracket[1], 512)
    vals = np.array([residual(w) for w in grid])
    sign_change = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    if sign_change.size == 0:
        raise NoRootInBracketError(f"no sign change of the residual in {bracket}")
    i = sign_change[0]
    return optimize.bisect(residual, grid[i], grid[i + 1], xtol=1e-12)


# ---------------------------------------------------------------------------
# second moments, inertia, torque balance


def position_covariance(
    params: RotorParams,
    baths: BathPair,
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
) -> tuple[float, float, float]:
    """Steady-state (x1^2, x2^2, x1 x2) from the Green's-function spectra."""
    coeffs = build_coefficients(params)
    hbar = params.hbar if baths.model is NoiseModel.QUANTUM_COLORED else 0.0
    omega_max = cutoff_frequency(params, baths, quad_cfg)
    scale = characteristic_frequency(params)

    def moment(combine):
        def kernel(w):
            k1, k2, l1, l2 = greens_functions(w, params, coeffs)
            s1 = float(bath_psd(w, baths.T1, params.eta, hbar))
            s2 = float(bath_psd(w, baths.T2, params.eta, hbar))
            return combine(k1, k2, l1, l2, s1, s2)
        return integrate_even_kernel(kernel, quad_cfg, omega_max, scale)

    x1sq = moment(lambda k1, k2, l1, l2, s1, s2: abs(k1) ** 2 * s1 + abs(k2) ** 2 * s2)
    x2sq = moment(lambda k1, k2, l1, l2, s1, s2: abs(l1) ** 2 * s1 + abs(l2) ** 2 * s2)
    x1x2 = moment(
        lambda k1, k2, l1, l2, s1, s2: (k1 * l1.conjugate()).real * s1
        + (k2 * l2.conjugate()).real * s2
    )
    return x1sq, x2sq, x1x2


def potential_torque(
    params: RotorParams,
    baths: BathPair,
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
) -> float:
    """Mean torque of the potential, <x1 dU/dx2 - x2 dU/dx1>.

    Equals (B - A) <x1 x2> + C (<x1^2> - <x2^2>); enters the steady-state
    torque balance against the friction and noise torques.
    """
    coeffs = build_coefficients(params)
    x1sq, x2sq, x1x2 = position_covariance(params, baths, quad_cfg)
    return (coeffs.B - coeffs.A) * x1x2 + coeffs.C * (x1sq - x2sq)


def moment_of_inertia(
    params: RotorParams,
    baths: BathPair,
    drive: DriveSpec = DriveSpec(),
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
) -> tuple[float, float]:
    """(I0, I_drive): intrinsic and drive contributions to m <x1^2 + x2^2>."""
    x1sq, x2sq, _ = position_covariance(params, baths, quad_cfg)
    i0 = params.m * (x1sq + x2sq)
    coeffs = build_coefficients(params)
    m, w0 = params.m, drive.omega0
    z = response_denominator(w0, params, coeffs)
    zsq = z.real * z.real + z.imag * z.imag
    i_drive = (
        0.5 * m * drive.D**2
        * ((coeffs.A - m * w0**2) ** 2 + (coeffs.B - m * w0**2) ** 2
           + 2.0 * (w0 * params.eta) ** 2 + 2.0 * coeffs.C**2)
        / zsq
    )
    return i0, i_drive


# ---------------------------------------------------------------------------
# work and heat


def work_rate(params: RotorParams, drive: DriveSpec) -> float:
    """Mean rate of work done by the circular drive; nonnegative for all inputs."""
    coeffs = build_coefficients(params)
    m, w0 = params.m, drive.omega0
    if drive.D == 0.0 or w0 == 0.0:
        return 0.0
    z = response_denominator(w0, params, coeffs)
    zsq = z.real * z.real + z.imag * z.imag
    return (
        0.5 * params.eta * (drive.D * w0) ** 2
        * ((coeffs.A - m * w0**2) ** 2 + (coeffs.B - m * w0**2) ** 2
           + 2.0 * (w0 * params.eta) ** 2 + 2.0 * coeffs.C**2)
        / zsq
    )


def heat_rates(
    params: RotorParams,
    baths: BathPair,
    drive: DriveSpec = DriveSpec(),
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
) -> tuple[float, float]:
    """Mean heat rates (r_q1, r_q2) into the rotator from each reservoir."""
    coeffs = build_coefficients(params)
    l0 = intrinsic_angular_momentum(params, baths, quad_cfg)
    m, w0 = params.m, drive.omega0
    base = coeffs.C / (2.0 * m) * l0
    if drive.D == 0.0 or w0 == 0.0:
        return -base, base
    z = response_denominator(w0, params, coeffs)
    zsq = z.real * z.real + z.imag * z.imag
    damp = 0.5 * params.eta * (drive.D * w0) ** 2 / zsq
    r_q1 = -base - damp * ((coeffs.B - m * w0**2) ** 2 + (coeffs.C + w0 * params.eta) ** 2)
    r_q2 = base - damp * ((coeffs.A - m * w0**2) ** 2 + (coeffs.C - w0 * params.eta) ** 2)
    return r_q1, r_q2


def heat_transfer_difference(
    params: RotorParams,
    baths: BathPair,
    drive: DriveSpec = DriveSpec(),
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
) -> float:
    """<delta r_q> = r_q1 - r_q2, cross-checked against its closed form."""
    coeffs = build_coefficients(params)
    l0 = intrinsic_angular_momentum(params, baths, quad_cfg)
    r_q1, r_q2 = heat_rates(params, baths, drive, quad_cfg)
    diff = r_q1 - r_q2
    m, w0 = params.m, drive.omega0
    direct = -coeffs.C / m * l0
    if drive.D != 0.0 and w0 != 0.0:
        z = response_denominator(w0, params, coeffs)
        zsq = z.real * z.real + z.imag * z.imag
        direct += (
            0.5 * params.eta * (drive.D * w0) ** 2
            * ((coeffs.A - m * w0**2) ** 2 - (coeffs.B - m * w0**2) ** 2
               - 4.0 * coeffs.C * params.eta * w0)
            / zsq
        )
    if abs(diff - direct) > 1e-9 * max(abs(diff), abs(direct)) + 1e-15:
        raise IdentityViolationError(
            f"heat-transfer identity violated: {diff:.17g} vs {direct:.17g}"
        )
    return diff


# ---------------------------------------------------------------------------
# residue route


def _response_poles_upper(params: RotorParams, coeffs: PotentialCoefficients) -> list[complex]:
    """Upper-half-plane zeros of Z(-w), i.e. the poles of 1/|Z|^2 with Im > 0."""
    poles = []
    for u in (params.u1, params.u2):
        r = cmath.sqrt(4.0 * params.m * u - params.eta**2)
        for sign in (1.0, -1.0):
            poles.append((1j * params.eta + sign * r) / (2.0 * params.m))
    return poles


def _nearest_tower_distance(z: complex, towers: tuple[float, ...]) -> float:
    d = math.inf
    for an in towers:
        p = max(1, round(z.imag / an))
        for q in (p - 1, p, p + 1):
            if q >= 1:
                d = min(d, abs(z - 1j * an * q))
    return d


def _pole_part_by_contour(f, zetas: list[complex], towers: tuple[float, ...],
                          guard: float) -> complex:
    """Sum of residues of f at the response poles, by small contour integrals.

    Poles are grouped into clusters and each cluster is enclosed by a circle
    that stays clear of the real axis and the thermal towers; the trapezoid
    rule on the circle is then exponentially accurate and handles double or
    nearly coincident poles without special-casing.
    """
    scale = max(abs(z) for z in zetas)
    merge_tol = 1e-3 * scale
    clusters: list[list[complex]] = []
    for z in zetas:
        for cl in clusters:
            if any(abs(z - w) < merge_tol for w in cl):
                cl.append(z)
                break
        else:
            clusters.append([z])
    total = 0.0 + 0.0j
    n_points = 512
    theta = 2.0 * math.pi * np.arange(n_points) / n_points
    unit = np.exp(1j * theta)
    for cl in clusters:
        center = sum(cl) / len(cl)
        spread = max(abs(z - center) for z in cl)
        limit = min(
            center.imag,
            _nearest_tower_distance(center, towers),
            min(
                (abs(z - center) for other in clusters if other is not cl for z in other),
                default=math.inf,
            ),
        )
        radius = 0.45 * limit
        if radius < max(4.0 * spread, guard):
            raise ResidueDegenerateError(
                "response poles too close to the real axis or to a thermal pole; "
                "use the quadrature route"
            )
        pts = center + radius * unit
        vals = np.array([f(w) for w in pts])
        total += radius * np.sum(vals * unit) / n_points
    return total


def residue_series_sum(
    observable: str,
    params: RotorParams,
    baths: BathPair,
    cfg: ResidueConfig = _DEFAULT_RESIDUE,
) -> float:
    """Contour evaluation of 'L0' or 'M_xi' as a sum over upper-half-plane residues.

    The pole set is the four zeros of Z(-w) (for L0 only; 1/Z has none above
    the real axis) plus the two thermal towers at w = 2 pi i p T_n / hbar.
    Tower truncation is corrected with a midpoint-rule tail integral over the
    continuous index, so the stated tolerance is met at moderate depth.
    """
    if observable not in ("L0", "M_xi"):
        raise ValueError(f"unknown observable {observable!r}")
    if params.hbar <= 0:
        raise ValueError("residue route requires hbar > 0")
    if baths.T1 <= 0 or baths.T2 <= 0:
        raise ValueError("residue route requires strictly positive temperatures")
    coeffs = build_coefficients(params)
    if coeffs.C == 0.0 or baths.T1 == baths.T2:
        return 0.0

    a = (2.0 * math.pi * baths.T1 / params.hbar, 2.0 * math.pi * baths.T2 / params.hbar)
    zetas = _response_poles_upper(params, coeffs)
    for zeta in zetas:
        if _nearest_tower_distance(zeta, a) < cfg.degeneracy_guard:
            raise ResidueDegenerateError(
                "thermal pole collides with a response pole; use quadrature"
            )

    def z_at(w):
        return response_denominator(w, params, coeffs)

    temps = (baths.T1, baths.T2)

    if observable == "L0":
        pref = -4.0 * params.m * params.eta**2 * coeffs.C

        def tower_term(n, p):
            w = 1j * a[n] * p
            sign = 1.0 if n == 0 else -1.0
            return sign * w**2 * (temps[n] * w) / (z_at(w) * z_at(-w))

        def f_pole(w):
            return (
                w**2
                * thermal_kernel_analytic(w, baths.T1, baths.T2, params.hbar)
                / (z_at(w) * z_at(-w))
            )

        pole_part = _pole_part_by_contour(f_pole, zetas, a, cfg.degeneracy_guard)
    else:
        pref = 2.0 * coeffs.C * params.eta

        def tower_term(n, p):
            w = 1j * a[n] * p
            sign = 1.0 if n == 0 else -1.0
            return sign * (temps[n] * w) / z_at(w)

        pole_part = 0.0 + 0.0j

    def term(p):
        return tower_term(0, p) + tower_term(1, p)

    def term_imag(p):
        return term(p).imag

    block = 64
    total = 0.0 + 0.0j
    p_done = 0
    while p_done < cfg.max_matsubara:
        hi = min(p_done + block, cfg.max_matsubara)
        for p in range(p_done + 1, hi + 1):
            total += term(p)
        p_done = hi
        tail, tail_err = integrate.quad(term_imag, p_done + 0.5, np.inf,
                                        epsrel=1e-13, epsabs=1e-300, limit=400)
        # midpoint-rule correction: the leading Euler-Maclaurin error term
        em = (term_imag(p_done + 1) - term_imag(p_done)) / 24.0
        candidate = pole_part + total + 1j * (tail + em)
        scale = abs(candidate)
        if scale == 0.0 or abs(em) + tail_err <= cfg.series_rel_tol * scale:
            result = 1j * candidate * pref
            if abs(result.imag) > 1e-9 * abs(result.real) + 1e-15:
                raise IdentityViolationError(
                    f"residue sum not real: {result.real:.6e} + {result.imag:.6e} i"
                )
            return result.real
    raise NonConvergentError(
        f"residue series for {observable} not converged at p = {cfg.max_matsubara}"
    )


# ---------------------------------------------------------------------------
# combined report


def steady_state_report(
    params: RotorParams,
    baths: BathPair,
    drive: DriveSpec = DriveSpec(),
    quad_cfg: QuadratureConfig = _DEFAULT_QUAD,
) -> SteadyStateReport:
    """All steady-state observables at one parameter point, with the energy
    balance r_q1 + r_q2 + r_w = 0 asserted."""
    l0 = intrinsic_angular_momentum(params, baths, quad_cfg)
    l0_cl = angular_momentum_classical(params, baths)
    m_xi = noise_torque(params, baths, quad_cfg)
    i0, i_drive = moment_of_inertia(params, baths, drive, quad_cfg)
    r_w = work_rate(params, drive)
    r_q1, r_q2 = heat_rates(params, baths, drive, quad_cfg)
    delta = heat_transfer_difference(params, baths, drive, quad_cfg)
    balance = r_q1 + r_q2 + r_w
    scale = max(abs(r_q1), abs(r_q2), abs(r_w), 1e-300)
    if abs(balance) > 1e-9 * scale:
        raise IdentityViolationError(f"energy conservation violated by {balance:.3e}")
    l_drive = drive.D**2 * drive.omega0 * drive_response(drive.omega0, params)
    return SteadyStateReport(
        L0=l0, L0_classical=l0_cl, M_xi=m_xi, I0=i0,
        L_drive=l_drive, I_drive=i_drive,
        r_w=r_w, r_q1=r_q1, r_q2=r_q2, delta_rq=delta,
    )
