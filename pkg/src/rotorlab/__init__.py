"""Two-temperature quantum Brownian gyrator laboratory.

Exact steady-state observables (quadrature and residue-summation routes),
colored-noise synthesis matching the quantum fluctuation-dissipation
spectrum, an underdamped Langevin ensemble simulator, and a batch CLI.
"""
from .model import (
    BathPair,
    DriveSpec,
    NoiseModel,
    PotentialCoefficients,
    RotorParams,
    StabilityError,
    bath_psd,
    build_coefficients,
    greens_functions,
    response_denominator,
    thermal_kernel,
)
from .exact import (
    Method,
    QuadratureConfig,
    ResidueConfig,
    SteadyStateReport,
    angular_momentum_classical,
    angular_momentum_quantum,
    arrest_frequency,
    driven_angular_momentum,
    heat_rates,
    heat_transfer_difference,
    intrinsic_angular_momentum,
    moment_of_inertia,
    noise_torque,
    noise_torque_quantum,
    overdamped_friction_torque,
    residue_series_sum,
    steady_state_report,
    work_rate,
)

from .noise import (
    NoiseTrace,
    child_seed,
    periodogram,
    read_trace,
    synthesize_quantum_trace,
    synthesize_white_trace,
    write_trace,
)
from .engine import (
    EnsembleResult,
    ObservableEstimate,
    SimConfig,
    rigid_body_diagnostic,
    run_ensemble,
    simulate_trajectory,
)
from .config import ConfigError, RunConfig, SweepSpec, parse_config, serialize_config

__version__ = "0.1.0"
