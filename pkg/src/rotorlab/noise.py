"""Gaussian force traces with the quantum fluctuation-dissipation spectrum.

Traces are synthesized in the frequency domain: independent complex Gaussian
amplitudes with the target power spectral density, Hermitian symmetry, inverse
FFT. The trace is periodic over its window, so downstream time averages
discard a burn-in. The Nyquist frequency pi/dt is the ultraviolet cutoff of
the linearly growing quantum spectrum, which makes dt a physics parameter.

Reproducibility contract: the generator is Philox (counter-based), seeded by
numpy's SeedSequence. Ensemble children are derived per
(master_seed, trajectory_index, bath_index), so traces are independent of
generation order and worker count.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .model import NoiseModel, bath_psd

__all__ = [
    "NoiseTrace",
    "child_seed",
    "synthesize_quantum_trace",
    "synthesize_white_trace",
    "periodogram",
    "write_trace",
    "read_trace",
]

_MAGIC = b"RTRLTRC1"


@dataclass(frozen=True)
class NoiseTrace:
    values: np.ndarray
    dt: float
    model: NoiseModel
    bath_temperature: float
    seed: int


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def child_seed(master_seed: int, trajectory_index: int, bath_index: int) -> int:
    """Deterministic 64-bit child seed for one (trajectory, bath) stream."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(trajectory_index, bath_index))
    return int(ss.generate_state(1, np.uint64)[0])


def _require_power_of_two(n_steps: int) -> None:
    if n_steps < 2 or n_steps & (n_steps - 1):
        raise ValueError(f"n_steps must be a power of two, got {n_steps}")


def synthesize_quantum_trace(
    T: float, eta: float, hbar: float, dt: float, n_steps: int, seed: int
) -> NoiseTrace:
    """Colored Gaussian trace whose periodogram converges to eta hbar w coth(hbar w/2T).

    Frequency-domain synthesis on the grid w_k = 2 pi k / (n_steps dt): each
    positive bin gets an independent complex Gaussian with E|X_k|^2 =
    S(w_k) n_steps / dt (standard periodogram normalization); the zero and
    Nyquist bins are real; the inverse transform is a real sequence.
    """
    _require_power_of_two(n_steps)
    if dt <= 0:
        raise ValueError("dt must be positive")
    if T <= 0 or hbar <= 0:
        raise ValueError("quantum synthesis requires T > 0 and hbar > 0")
    rng = _generator(seed)
    omega = 2.0 * np.pi * np.fft.rfftfreq(n_steps, d=dt)
    s = np.asarray(bath_psd(omega, T, eta, hbar))
    amp = np.sqrt(s * n_steps / dt)
    n_bins = omega.size
    spectrum = np.empty(n_bins, dtype=complex)
    # interior bins split the variance between real and imaginary parts
    re = rng.standard_normal(n_bins)
    im = rng.standard_normal(n_bins)
    spectrum[1:-1] = amp[1:-1] * (re[1:-1] + 1j * im[1:-1]) / np.sqrt(2.0)
    spectrum[0] = amp[0] * re[0]
    spectrum[-1] = amp[-1] * re[-1]
    values = np.fft.irfft(spectrum, n=n_steps)
    return NoiseTrace(values=values, dt=dt, model=NoiseModel.QUANTUM_COLORED,
                      bath_temperature=T, seed=seed)


def synthesize_white_trace(
    T: float, eta: float, dt: float, n_steps: int, seed: int
) -> NoiseTrace:
    """Classical white-noise trace: i.i.d. Gaussians with variance 2 eta T / dt."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    rng = _generator(seed)
    sigma = np.sqrt(2.0 * eta * T / dt)
    values = sigma * rng.standard_normal(n_steps)
    return NoiseTrace(values=values, dt=dt, model=NoiseModel.CLASSICAL_WHITE,
                      bath_temperature=T, seed=seed)


def periodogram(trace: NoiseTrace) -> tuple[np.ndarray, np.ndarray]:
    """(omega, power): |rfft|^2 dt / N at the nonnegative grid frequencies.

    Averaging the power over an ensemble of traces estimates the two-sided
    PSD at w >= 0.
    """
    n = trace.values.size
    omega = 2.0 * np.pi * np.fft.rfftfreq(n, d=trace.dt)
    power = np.abs(np.fft.rfft(trace.values)) ** 2 * trace.dt / n
    return omega, power


def write_trace(path, trace: NoiseTrace) -> None:
    """Binary dump: 32-byte header (magic, N_t, dt, seed), then LE float64 samples."""
    header = _MAGIC + struct.pack("<Qd", trace.values.size, trace.dt) \
        + struct.pack("<Q", trace.seed & 0xFFFFFFFFFFFFFFFF)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(trace.values.astype("<f8").tobytes())


def read_trace(path, model: NoiseModel = NoiseModel.QUANTUM_COLORED,
               bath_temperature: float = 0.0) -> NoiseTrace:
    with open(path, "rb") as fh:
        header = fh.read(32)
        if header[:8] != _MAGIC:
            raise ValueError(f"{path}: not a rotorlab trace file")
        n, dt = struct.unpack("<Qd", header[8:24])
        (seed,) = struct.unpack("<Q", header[24:32])
        values = np.frombuffer(fh.read(8 * n), dtype="<f8").copy()
    if values.size != n:
        raise ValueError(f"{path}: truncated trace file")
    return NoiseTrace(values=values, dt=dt, model=model,
                      bath_temperature=bath_temperature, seed=seed)
