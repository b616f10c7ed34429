"""Finite-temperature semiclassical cavity QED: trajectories, Poincare
sections, maximum Lyapunov exponents, and Levy-flight statistics for a
two-level atom with recoil coupled to a single cavity mode and a heat
bath represented by a doubled (tilde) field sector."""

__version__ = "0.1.0"

from .analysis import (
    FlightStats,
    LyapunovEstimate,
    PoincareSection,
    SectionDef,
    SweepResult,
    benettin,
    levy_flights,
    lyapunov_max,
    poincare,
    section_points,
    sweep,
)
from .errors import (
    ConfigError,
    CrossingConvergenceError,
    CrossingPreconditionError,
    IntegrationDivergedError,
    InvalidTemperatureError,
    JcChaosError,
    RenormalizationError,
    SamplingResolutionError,
    StiffnessError,
)
from .integrate import (
    IntegrationSpec,
    Trajectory,
    VectorField,
    harmonic_field,
    integrate,
    refine_crossing,
    rotation_field,
    saddle_field,
    zero_field,
)
from .model import (
    SystemParams,
    ThermalDerivative,
    ThermalState,
    ZeroTDerivative,
    ZeroTState,
    check_axioms,
    deriv_thermal,
    deriv_zero_t,
    energy_thermal,
    energy_zero_t,
    excitation_thermal,
    excitation_zero_t,
    spin_norm,
    thermal_field,
    zero_t_field,
)
from .thermal import Temperature, ThermalFactors, thermal_factors
