"""Dimensionless model: parameters, phase-space states, the two vector
fields (zero-temperature and thermal, in literal and consistency-repaired
form), and the conserved-quantity evaluators.

Conventions
-----------
All quantities are dimensionless: position in units of the inverse field
wavenumber, momentum in photon-recoil units, time tau in units of the
inverse coupling rate. The Bloch vector (sx, sy, sz) has unit norm; the
field quadratures (ax, ay) are the real/imaginary parts of the slowly
varying mode amplitude, and (atx, aty) the same for the tilde (heat-bath)
partner mode. The recoil parameter alpha and detuning delta are the two
zero-temperature control knobs; temperature enters through the Bogoliubov
pair (cosh, sinh).

Zero-temperature flow (state x, p, sx, sy, sz, ax, ay):

    x'  = alpha * p
    p'  = -2 (ax sx + ay sy) sin x
    sx' = -delta sy + 2 ay sz cos x
    sy' =  delta sx - 2 ax sz cos x
    sz' =  2 (ax sy - ay sx) cos x
    ax' = -sy cos x
    ay' =  sx cos x

The sz equation is the unique completion that conserves both the Bloch
norm and the excitation ax^2 + ay^2 + sz; it also matches the theta -> 0
limit of the thermal flow below.

Thermal flow, consistent form (state x, p, p_tilde, sx, sy, sz, ax, ay,
atx, aty), with ch = cosh(theta), sh = sinh(theta) and the mixed
quadratures Bx = ch*ax + sh*atx, By = ch*ay - sh*aty:

    x'   = alpha * p
    p'   = -2 (Bx sx + By sy) sin x
    sx'  = -delta sy + 2 By sz cos x
    sy'  =  delta sx - 2 Bx sz cos x
    sz'  =  2 (Bx sy - By sx) cos x
    ax'  = -ch sy cos x          atx' =  sh sy cos x
    ay'  =  ch sx cos x          aty' =  sh sx cos x
    p_tilde' = 0

This is obtained by doubling the Hamiltonian (tilde sector carrying only
its free kinetic and field terms), rotating with the Bogoliubov
transformation, taking Heisenberg equations, averaging, and realifying
exactly as at zero temperature. It satisfies three structural axioms:
A1 the spin drive is conjugate-paired (the Bloch norm is preserved),
A2 at theta = 0 zero tilde data stays exactly zero,
A3 at theta = 0 the physical block reduces exactly to the flow above.

The literal variant keeps the doubled equations in their raw,
uncorrected transcription (same state layout, x' = alpha*(p - p_tilde),
p_tilde frozen); it fails A2/A3 and does not preserve the Bloch norm,
and is retained for comparison runs only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numba import njit

from .integrate import VectorField
from .thermal import Temperature, ThermalFactors, thermal_factors

VARIANT_CONSISTENT = "consistent"
VARIANT_LITERAL = "literal"

ZERO_T_FIELDS = ("x", "p", "sx", "sy", "sz", "ax", "ay")
THERMAL_FIELDS = ("x", "p", "p_tilde", "sx", "sy", "sz", "ax", "ay", "atx", "aty")

BLOCH_NORM_TOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Dimensionless control parameters plus the thermal-model selector.

    alpha << 1 makes the recoil a slow degree of freedom; 1e-3 is the
    package default and is echoed into every output header.
    """

    delta: float
    alpha: float = 1e-3
    temperature: Temperature = Temperature.zero()
    variant: str = VARIANT_CONSISTENT

    def __post_init__(self):
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha!r}")
        if not math.isfinite(self.delta):
            raise ValueError(f"delta must be finite, got {self.delta!r}")
        if self.variant not in (VARIANT_CONSISTENT, VARIANT_LITERAL):
            raise ValueError(f"variant must be 'consistent' or 'literal', got {self.variant!r}")


def _check_bloch(sx, sy, sz):
    norm = sx * sx + sy * sy + sz * sz
    if abs(norm - 1.0) > BLOCH_NORM_TOL:
        raise ValueError(f"Bloch vector must have unit norm, got |s|^2 = {norm!r}")


def _check_finite(values, what):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite component in {what}")


@dataclass(frozen=True)
class ZeroTState:
    """Zero-temperature phase-space point (7 real components)."""

    x: float
    p: float
    sx: float
    sy: float
    sz: float
    ax: float
    ay: float

    def __post_init__(self):
        _check_finite(self.as_array(), "ZeroTState")
        _check_bloch(self.sx, self.sy, self.sz)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.p, self.sx, self.sy, self.sz, self.ax, self.ay])

    @classmethod
    def from_array(cls, y) -> "ZeroTState":
        return cls(*map(float, y))


@dataclass(frozen=True)
class ThermalState:
    """Thermal phase-space point (10 real components, tilde sector included)."""

    x: float
    p: float
    p_tilde: float
    sx: float
    sy: float
    sz: float
    ax: float
    ay: float
    atx: float
    aty: float

    def __post_init__(self):
        _check_finite(self.as_array(), "ThermalState")
        _check_bloch(self.sx, self.sy, self.sz)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.p, self.p_tilde, self.sx, self.sy, self.sz,
                         self.ax, self.ay, self.atx, self.aty])

    @classmethod
    def from_array(cls, y) -> "ThermalState":
        return cls(*map(float, y))


@dataclass(frozen=True)
class ZeroTDerivative:
    """Time derivative of a ZeroTState, per unit tau."""

    x: float
    p: float
    sx: float
    sy: float
    sz: float
    ax: float
    ay: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.p, self.sx, self.sy, self.sz, self.ax, self.ay])


@dataclass(frozen=True)
class ThermalDerivative:
    """Time derivative of a ThermalState, per unit tau."""

    x: float
    p: float
    p_tilde: float
    sx: float
    sy: float
    sz: float
    ax: float
    ay: float
    atx: float
    aty: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.p, self.p_tilde, self.sx, self.sy, self.sz,
                         self.ax, self.ay, self.atx, self.aty])


# ---------------------------------------------------------------------------
# compiled right-hand sides; pars = (alpha, delta, cosh_theta, sinh_theta)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def rhs_zero_t(y, pars, out):
    alpha = pars[0]
    delta = pars[1]
    cx = np.cos(y[0])
    snx = np.sin(y[0])
    p, sx, sy, sz, ax, ay = y[1], y[2], y[3], y[4], y[5], y[6]
    out[0] = alpha * p
    out[1] = -2.0 * (ax * sx + ay * sy) * snx
    out[2] = -delta * sy + 2.0 * ay * sz * cx
    out[3] = delta * sx - 2.0 * ax * sz * cx
    out[4] = 2.0 * (ax * sy - ay * sx) * cx
    out[5] = -sy * cx
    out[6] = sx * cx


@njit(cache=True, nogil=True)
def rhs_thermal_consistent(y, pars, out):
    alpha = pars[0]
    delta = pars[1]
    ch = pars[2]
    sh = pars[3]
    cx = np.cos(y[0])
    snx = np.sin(y[0])
    p = y[1]
    sx, sy, sz = y[3], y[4], y[5]
    ax, ay, atx, aty = y[6], y[7], y[8], y[9]
    bx = ch * ax + sh * atx
    by = ch * ay - sh * aty
    out[0] = alpha * p
    out[1] = -2.0 * (bx * sx + by * sy) * snx
    out[2] = 0.0
    out[3] = -delta * sy + 2.0 * by * sz * cx
    out[4] = delta * sx - 2.0 * bx * sz * cx
    out[5] = 2.0 * (bx * sy - by * sx) * cx
    out[6] = -ch * sy * cx
    out[7] = ch * sx * cx
    out[8] = sh * sy * cx
    out[9] = sh * sx * cx


@njit(cache=True, nogil=True)
def rhs_thermal_literal(y, pars, out):
    # Raw, uncorrected transcription of the doubled equations of motion,
    # realified through the same expectation conventions as the flows
    # above. Not derivable from a single Hamiltonian; kept for
    # comparison runs.
    alpha = pars[0]
    delta = pars[1]
    ch = pars[2]
    sh = pars[3]
    cx = np.cos(y[0])
    snx = np.sin(y[0])
    p, pt = y[1], y[2]
    sx, sy, sz = y[3], y[4], y[5]
    ax, ay, atx, aty = y[6], y[7], y[8], y[9]
    # momentum drive K1 and spin drives B1 = conj(B2)
    k1re = (ax - atx) * (ch - sh)
    k1im = -(ay - aty) * (ch + sh)
    b2re = -(ax - atx) * (ch - sh)
    b2im = (aty - ay) * (sh + ch)
    out[0] = alpha * (p - pt)
    out[1] = 2.0 * (k1re * sx - k1im * sy) * snx
    out[2] = 0.0  # tilde momentum has no evolution equation; held constant
    out[3] = delta * sy + 2.0 * sz * b2im * cx
    out[4] = -delta * sx - 2.0 * sz * b2re * cx
    out[5] = -2.0 * (b2re * sy - b2im * sx) * cx
    out[6] = sy * (ch + sh) * cx
    out[7] = -sx * (ch - sh) * cx
    out[8] = -sy * (ch + sh) * cx
    out[9] = sx * (ch - sh) * cx


def _pars_array(params: SystemParams, f: ThermalFactors) -> np.ndarray:
    return np.array([params.alpha, params.delta, f.cosh_theta, f.sinh_theta])


def zero_t_field(params: SystemParams) -> VectorField:
    """Zero-temperature vector field (temperature in params is ignored)."""
    pars = np.array([params.alpha, params.delta, 1.0, 0.0])
    return VectorField(rhs_zero_t, pars, 7, "zero_t", params=params, spin_slice=(2, 5))


def thermal_field(params: SystemParams, f: ThermalFactors | None = None) -> VectorField:
    """Thermal vector field for the variant selected in params."""
    if f is None:
        f = thermal_factors(params.temperature)
    kernel = rhs_thermal_consistent if params.variant == VARIANT_CONSISTENT else rhs_thermal_literal
    name = f"thermal_{params.variant}"
    return VectorField(kernel, _pars_array(params, f), 10, name, params=params, spin_slice=(3, 6))


# ---------------------------------------------------------------------------
# derivative operations on state objects
# ---------------------------------------------------------------------------


def deriv_zero_t(s: ZeroTState, params: SystemParams) -> ZeroTDerivative:
    """Right-hand side of the zero-temperature flow at state s."""
    y = s.as_array()
    out = np.empty(7)
    rhs_zero_t(y, np.array([params.alpha, params.delta, 1.0, 0.0]), out)
    return ZeroTDerivative(*map(float, out))


def deriv_thermal(s: ThermalState, params: SystemParams, f: ThermalFactors) -> ThermalDerivative:
    """Right-hand side of the thermal flow (variant taken from params)."""
    y = s.as_array()
    out = np.empty(10)
    kernel = rhs_thermal_consistent if params.variant == VARIANT_CONSISTENT else rhs_thermal_literal
    kernel(y, _pars_array(params, f), out)
    return ThermalDerivative(*map(float, out))


# ---------------------------------------------------------------------------
# first integrals and diagnostics
# ---------------------------------------------------------------------------


def energy_zero_t(s: ZeroTState, params: SystemParams) -> float:
    """Rotating-frame energy; constant along the zero-temperature flow."""
    return (params.alpha * s.p ** 2 / 2.0 - params.delta * s.sz
            - 2.0 * (s.ax * s.sx + s.ay * s.sy) * math.cos(s.x))


def excitation_zero_t(s: ZeroTState) -> float:
    """Field intensity plus inversion; constant along the flow."""
    return s.ax ** 2 + s.ay ** 2 + s.sz


def spin_norm(s: Union[ZeroTState, ThermalState]) -> float:
    return s.sx ** 2 + s.sy ** 2 + s.sz ** 2


def energy_thermal(s: ThermalState, params: SystemParams, f: ThermalFactors) -> float:
    """Thermal analogue of the rotating-frame energy.

    Uses the Bogoliubov-mixed quadratures; constant along the consistent
    flow, a diagnostic only for the literal one. Reduces to the
    zero-temperature energy at theta = 0.
    """
    bx = f.cosh_theta * s.ax + f.sinh_theta * s.atx
    by = f.cosh_theta * s.ay - f.sinh_theta * s.aty
    return (params.alpha * s.p ** 2 / 2.0 - params.delta * s.sz
            - 2.0 * (bx * s.sx + by * s.sy) * math.cos(s.x))


def excitation_thermal(s: ThermalState, f: ThermalFactors) -> float:
    """Thermal analogue of the excitation first integral."""
    bx = f.cosh_theta * s.ax + f.sinh_theta * s.atx
    by = f.cosh_theta * s.ay - f.sinh_theta * s.aty
    return bx ** 2 + by ** 2 + s.sz


# array versions, vectorized over trajectory rows (layout per *_FIELDS)


def energy_zero_t_rows(states: np.ndarray, alpha: float, delta: float) -> np.ndarray:
    x, p, sx, sy, sz, ax, ay = (states[:, j] for j in range(7))
    return alpha * p ** 2 / 2.0 - delta * sz - 2.0 * (ax * sx + ay * sy) * np.cos(x)


def excitation_zero_t_rows(states: np.ndarray) -> np.ndarray:
    return states[:, 5] ** 2 + states[:, 6] ** 2 + states[:, 4]


def spin_norm_rows(states: np.ndarray) -> np.ndarray:
    off = 2 if states.shape[1] == 7 else 3
    return (states[:, off] ** 2 + states[:, off + 1] ** 2 + states[:, off + 2] ** 2)


def energy_thermal_rows(states: np.ndarray, alpha: float, delta: float,
                        f: ThermalFactors) -> np.ndarray:
    x, p = states[:, 0], states[:, 1]
    sx, sy, sz = states[:, 3], states[:, 4], states[:, 5]
    bx = f.cosh_theta * states[:, 6] + f.sinh_theta * states[:, 8]
    by = f.cosh_theta * states[:, 7] - f.sinh_theta * states[:, 9]
    return alpha * p ** 2 / 2.0 - delta * sz - 2.0 * (bx * sx + by * sy) * np.cos(x)


def excitation_thermal_rows(states: np.ndarray, f: ThermalFactors) -> np.ndarray:
    bx = f.cosh_theta * states[:, 6] + f.sinh_theta * states[:, 8]
    by = f.cosh_theta * states[:, 7] - f.sinh_theta * states[:, 9]
    return bx ** 2 + by ** 2 + states[:, 5]


# ---------------------------------------------------------------------------
# consistency axioms
# ---------------------------------------------------------------------------


def check_axioms(params: SystemParams, n_samples: int = 64, seed: int = 0) -> dict:
    """Probe the thermal flow of ``params.variant`` against the three
    structural axioms; returns pass/fail per axiom plus residuals.

    A1  spin drive is conjugate-paired: d|s|^2/dtau = 0 for random states.
    A2  at theta = 0 with zero tilde data the tilde block stays at rest.
    A3  at theta = 0 with zero tilde data the physical block equals the
        zero-temperature flow componentwise.

    The consistent variant passes all three (A2/A3 exactly); the literal
    transcription is reported, not rejected.
    """
    rng = np.random.default_rng(seed)
    kernel = rhs_thermal_consistent if params.variant == VARIANT_CONSISTENT else rhs_thermal_literal

    f = thermal_factors(params.temperature)
    pars_t = np.array([params.alpha, params.delta, f.cosh_theta, f.sinh_theta])
    pars_0 = np.array([params.alpha, params.delta, 1.0, 0.0])
    pars_z = np.array([params.alpha, params.delta, 1.0, 0.0])

    a1_res = 0.0
    a2_res = 0.0
    a3_res = 0.0
    out10 = np.empty(10)
    out7 = np.empty(7)
    for _ in range(n_samples):
        y = _random_thermal_state(rng)
        # A1 at the requested temperature
        kernel(y, pars_t, out10)
        sdot = y[3] * out10[3] + y[4] * out10[4] + y[5] * out10[5]
        a1_res = max(a1_res, abs(sdot))
        # A2/A3 at theta = 0 with zero tilde data
        y0 = y.copy()
        y0[2] = 0.0
        y0[8] = 0.0
        y0[9] = 0.0
        kernel(y0, pars_0, out10)
        a2_res = max(a2_res, abs(out10[2]), abs(out10[8]), abs(out10[9]))
        yz = np.array([y0[0], y0[1], y0[3], y0[4], y0[5], y0[6], y0[7]])
        rhs_zero_t(yz, pars_z, out7)
        phys = np.array([out10[0], out10[1], out10[3], out10[4], out10[5], out10[6], out10[7]])
        a3_res = max(a3_res, float(np.max(np.abs(phys - out7))))
    scale = 1.0 + abs(params.delta) + f.cosh_theta
    return {
        "a1": bool(a1_res <= 1e-13 * scale),
        "a2": bool(a2_res == 0.0),
        "a3": bool(a3_res <= 1e-15 * scale),
        "residuals": {"a1": float(a1_res), "a2": float(a2_res), "a3": float(a3_res)},
        "variant": params.variant,
    }


def _random_thermal_state(rng: np.random.Generator) -> np.ndarray:
    s = rng.standard_normal(3)
    s /= np.linalg.norm(s)
    y = np.empty(10)
    y[0] = rng.uniform(-2.0 * np.pi, 2.0 * np.pi)
    y[1] = rng.uniform(-5.0, 5.0)
    y[2] = rng.uniform(-2.0, 2.0)
    y[3:6] = s
    y[6:10] = rng.uniform(-2.0, 2.0, size=4)
    return y
