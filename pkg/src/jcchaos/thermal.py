"""Temperature representation and the Bogoliubov mixing factors.

Temperature enters the model only through the dimensionless inverse
temperature beta (cavity frequency over k_B T) and the derived pair
(sinh(theta), cosh(theta)) with sinh^2(theta) = 1 / (e^beta - 1).
beta = inf is the zero-temperature limit and maps to (0, 1) exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidTemperatureError

# Below this beta the mixing amplitude grows like beta^(-1/2) and the
# flow becomes stiff; the CLI warns, nothing is capped (exponent sweeps
# go down to beta = 0.01, which must stay representable).
STIFF_BETA = 0.01


@dataclass(frozen=True)
class Temperature:
    """Dimensionless inverse temperature; ``beta = math.inf`` means T = 0.

    The reference frequency in beta is the cavity mode frequency (the
    Bogoliubov rotation acts on the field operators), not the atomic one.
    """

    beta: float

    def __post_init__(self):
        b = self.beta
        if isinstance(b, bool) or not isinstance(b, (int, float)):
            raise InvalidTemperatureError(f"beta must be a positive real, got {b!r}")
        b = float(b)
        if math.isnan(b) or b <= 0.0:
            raise InvalidTemperatureError(f"beta must be positive and finite or inf, got {b!r}")
        object.__setattr__(self, "beta", b)

    @classmethod
    def zero(cls) -> "Temperature":
        return cls(math.inf)

    @classmethod
    def from_beta(cls, beta: float) -> "Temperature":
        return cls(beta)

    @property
    def is_zero(self) -> bool:
        return math.isinf(self.beta)


@dataclass(frozen=True)
class ThermalFactors:
    """Bogoliubov pair; satisfies cosh^2 - sinh^2 = 1."""

    sinh_theta: float
    cosh_theta: float


def thermal_factors(t: Temperature) -> ThermalFactors:
    """Mixing factors for a given temperature.

    Zero temperature returns (0, 1) without touching floating point.
    sinh^2(theta) is evaluated through expm1 so that small beta does not
    lose digits to cancellation; for very large beta the amplitude
    underflows cleanly to 0 (never NaN).
    """
    if t.is_zero:
        return ThermalFactors(0.0, 1.0)
    # 1/(e^b - 1) rewritten as e^-b/(1 - e^-b): expm1 keeps the small-beta
    # digits and the exponential never overflows; for huge beta sinh
    # underflows to exact zero instead of going NaN
    sh = math.exp(-0.5 * t.beta) / math.sqrt(-math.expm1(-t.beta))
    ch = math.sqrt(1.0 + sh * sh)
    return ThermalFactors(sh, ch)
