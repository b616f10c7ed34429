"""Exception types shared across the package."""


class JcChaosError(Exception):
    """Base class for all package errors."""


class InvalidTemperatureError(JcChaosError):
    """Inverse temperature is non-positive or non-finite (inf means T=0)."""


class IntegrationDivergedError(JcChaosError):
    """A non-finite state was produced; carries the last valid time."""

    def __init__(self, last_tau: float):
        self.last_tau = last_tau
        super().__init__(f"integration diverged; last valid tau = {last_tau:.6g}")


class StiffnessError(JcChaosError):
    """Adaptive step size collapsed below the hard floor."""

    def __init__(self, tau: float, step: float):
        self.tau = tau
        self.step = step
        super().__init__(f"step size underflow ({step:.3g}) at tau = {tau:.6g}")


class CrossingPreconditionError(JcChaosError):
    """refine_crossing called on a step without a sign change of g."""


class CrossingConvergenceError(JcChaosError):
    """Crossing refinement did not reach |g| below tolerance."""


class SamplingResolutionError(JcChaosError):
    """Trajectory is sampled too sparsely for the requested statistic."""


class RenormalizationError(JcChaosError):
    """Benettin separation under/overflowed during renormalization."""

    def __init__(self, message: str, tau: float, separation: float):
        self.tau = tau
        self.separation = separation
        super().__init__(f"{message} (tau = {tau:.6g}, d = {separation:.3g})")


class ConfigError(JcChaosError):
    """Experiment configuration is malformed; message names the field."""
