"""Deterministic ODE integration: fixed-step RK4 and an embedded
Dormand-Prince 4(5) pair, cubic-Hermite dense sampling, and crossing
refinement for section extraction.

Vector fields are bundles of a numba-compiled kernel with signature
``kernel(y, pars, out)`` plus its parameter array; the step loops are
compiled too, so multi-million-step runs stay cheap. Everything here is
pure floating point with no randomness: identical inputs give bitwise
identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numba import njit

from .errors import (
    CrossingConvergenceError,
    CrossingPreconditionError,
    IntegrationDivergedError,
    StiffnessError,
)

H_FLOOR = 1e-12  # adaptive steps at or below this raise StiffnessError
MAX_ADAPTIVE_STEPS = 50_000_000  # progress guard for pathological fields

_STATUS_OK = 0
_STATUS_DIVERGED = 1
_STATUS_STIFF = 2


@dataclass
class VectorField:
    """A compiled right-hand side dy/dtau = kernel(y, pars).

    kernel must be a numba ``@njit`` function taking (y, pars, out) and
    writing the derivative into ``out``. ``params`` carries the model's
    parameter object (if any) purely as metadata; ``spin_slice`` marks the
    Bloch-vector block, half-open (start, stop), for routines that
    renormalize spins.
    """

    kernel: Callable
    pars: np.ndarray
    dim: int
    name: str
    params: object = None
    spin_slice: Optional[tuple] = None

    def __call__(self, y) -> np.ndarray:
        out = np.empty(self.dim)
        self.kernel(np.asarray(y, dtype=np.float64), self.pars, out)
        return out


@dataclass(frozen=True)
class IntegrationSpec:
    """How to integrate: method, step/tolerances, span, sampling stride."""

    method: str = "rk4"  # "rk4" (fixed step) or "rk45" (embedded adaptive)
    step: float = 1e-3
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_end: float = 1000.0
    sample_every: float = 0.1

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.step > 0.0 and math.isfinite(self.step)):
            raise ValueError("step must be positive and finite")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be positive and finite")
        if not (self.sample_every > 0.0 and math.isfinite(self.sample_every)):
            raise ValueError("sample_every must be positive and finite")
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not (1e-14 <= v <= 1e-2):
                raise ValueError(f"{name} must lie in [1e-14, 1e-2], got {v!r}")


@dataclass
class Trajectory:
    """Sampled solution: times, state rows, and the run's metadata."""

    times: np.ndarray
    states: np.ndarray
    params: object = None
    spec: Optional[IntegrationSpec] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.states = np.asarray(self.states, dtype=np.float64)
        if self.states.ndim != 2 or self.times.ndim != 1:
            raise ValueError("times must be 1-D and states 2-D")
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("times and states lengths differ")
        if self.times.shape[0] > 1 and not np.all(np.diff(self.times) > 0.0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("non-finite state in trajectory")

    def __len__(self) -> int:
        return self.times.shape[0]


# ---------------------------------------------------------------------------
# compiled core
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _hermite(theta, h, y0, f0, y1, f1, out):
    # cubic Hermite on one step; exact at theta = 0 and 1
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    for j in range(y0.shape[0]):
        out[j] = h00 * y0[j] + h * (h10 * f0[j] + h11 * f1[j]) + h01 * y1[j]


@njit(nogil=True)
def _rk4_step(rhs, pars, y, h, k1, k2, k3, k4, yt, ynew):
    n = y.shape[0]
    rhs(y, pars, k1)
    for j in range(n):
        yt[j] = y[j] + 0.5 * h * k1[j]
    rhs(yt, pars, k2)
    for j in range(n):
        yt[j] = y[j] + 0.5 * h * k2[j]
    rhs(yt, pars, k3)
    for j in range(n):
        yt[j] = y[j] + h * k3[j]
    rhs(yt, pars, k4)
    for j in range(n):
        ynew[j] = y[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])


@njit(nogil=True)
def _drive_rk4(rhs, pars, y0, h, t_end, sample_ts):
    n = y0.shape[0]
    ns = sample_ts.shape[0]
    out = np.empty((ns, n))
    y = y0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    yt = np.empty(n)
    y1 = np.empty(n)
    f1 = np.empty(n)
    ys = np.empty(n)
    rhs(y, pars, k1)
    idx = 0
    while idx < ns and sample_ts[idx] <= 0.0:
        for j in range(n):
            out[idx, j] = y[j]
        idx += 1
    k = 0
    t0 = 0.0
    while t0 < t_end:
        t1 = (k + 1) * h
        if t1 > t_end:
            t1 = t_end
        hs = t1 - t0
        if hs <= 0.0:
            break
        for j in range(n):
            yt[j] = y[j] + 0.5 * hs * k1[j]
        rhs(yt, pars, k2)
        for j in range(n):
            yt[j] = y[j] + 0.5 * hs * k2[j]
        rhs(yt, pars, k3)
        for j in range(n):
            yt[j] = y[j] + hs * k3[j]
        rhs(yt, pars, k4)
        for j in range(n):
            y1[j] = y[j] + (hs / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        for j in range(n):
            if not np.isfinite(y1[j]):
                return _STATUS_DIVERGED, t0, out[:idx]
        rhs(y1, pars, f1)  # derivative at the right endpoint; next step's k1
        while idx < ns and sample_ts[idx] <= t1:
            th = (sample_ts[idx] - t0) / hs
            if th < 0.0:
                th = 0.0
            elif th > 1.0:
                th = 1.0
            _hermite(th, hs, y, k1, y1, f1, ys)
            for j in range(n):
                out[idx, j] = ys[j]
            idx += 1
        for j in range(n):
            y[j] = y1[j]
            k1[j] = f1[j]
        k += 1
        t0 = t1
    return _STATUS_OK, t0, out[:idx]


@njit(nogil=True)
def _drive_rk45(rhs, pars, y0, h0, rtol, atol, t_end, sample_ts, h_floor, max_steps):
    # Dormand-Prince 5(4); the 5th-order solution is propagated, FSAL.
    n = y0.shape[0]
    ns = sample_ts.shape[0]
    out = np.empty((ns, n))
    y = y0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)
    yt = np.empty(n)
    y5 = np.empty(n)
    y4 = np.empty(n)
    ys = np.empty(n)
    rhs(y, pars, k1)
    idx = 0
    while idx < ns and sample_ts[idx] <= 0.0:
        for j in range(n):
            out[idx, j] = y[j]
        idx += 1
    t = 0.0
    h = h0
    err_prev = 1.0
    steps = 0
    while t < t_end:
        steps += 1
        if steps > max_steps:
            return _STATUS_STIFF, t, h, out[:idx]
        last = False
        if h >= t_end - t:
            h = t_end - t
            last = True
        for j in range(n):
            yt[j] = y[j] + h * (0.2 * k1[j])
        rhs(yt, pars, k2)
        for j in range(n):
            yt[j] = y[j] + h * (3.0 / 40.0 * k1[j] + 9.0 / 40.0 * k2[j])
        rhs(yt, pars, k3)
        for j in range(n):
            yt[j] = y[j] + h * (44.0 / 45.0 * k1[j] - 56.0 / 15.0 * k2[j] + 32.0 / 9.0 * k3[j])
        rhs(yt, pars, k4)
        for j in range(n):
            yt[j] = y[j] + h * (
                19372.0 / 6561.0 * k1[j]
                - 25360.0 / 2187.0 * k2[j]
                + 64448.0 / 6561.0 * k3[j]
                - 212.0 / 729.0 * k4[j]
            )
        rhs(yt, pars, k5)
        for j in range(n):
            yt[j] = y[j] + h * (
                9017.0 / 3168.0 * k1[j]
                - 355.0 / 33.0 * k2[j]
                + 46732.0 / 5247.0 * k3[j]
                + 49.0 / 176.0 * k4[j]
                - 5103.0 / 18656.0 * k5[j]
            )
        rhs(yt, pars, k6)
        for j in range(n):
            y5[j] = y[j] + h * (
                35.0 / 384.0 * k1[j]
                + 500.0 / 1113.0 * k3[j]
                + 125.0 / 192.0 * k4[j]
                - 2187.0 / 6784.0 * k5[j]
                + 11.0 / 84.0 * k6[j]
            )
        rhs(y5, pars, k7)
        for j in range(n):
            y4[j] = y[j] + h * (
                5179.0 / 57600.0 * k1[j]
                + 7571.0 / 16695.0 * k3[j]
                + 393.0 / 640.0 * k4[j]
                - 92097.0 / 339200.0 * k5[j]
                + 187.0 / 2100.0 * k6[j]
                + 1.0 / 40.0 * k7[j]
            )
        err = 0.0
        finite = True
        for j in range(n):
            if not (np.isfinite(y5[j]) and np.isfinite(k7[j])):
                finite = False
                break
            sc = atol + rtol * max(abs(y[j]), abs(y5[j]))
            e = (y5[j] - y4[j]) / sc
            err += e * e
        if finite:
            err = np.sqrt(err / n)
        if finite and err <= 1.0:
            t1 = t_end if last else t + h
            hs = t1 - t
            while idx < ns and sample_ts[idx] <= t1:
                th = (sample_ts[idx] - t) / hs
                if th < 0.0:
                    th = 0.0
                elif th > 1.0:
                    th = 1.0
                _hermite(th, hs, y, k1, y5, k7, ys)
                for j in range(n):
                    out[idx, j] = ys[j]
                idx += 1
            for j in range(n):
                y[j] = y5[j]
                k1[j] = k7[j]
            t = t1
            if err < 1e-10:
                err = 1e-10
            fac = 0.9 * err ** (-0.14) * err_prev ** 0.08  # PI controller
            if fac > 10.0:
                fac = 10.0
            elif fac < 0.2:
                fac = 0.2
            h = h * fac
            err_prev = err
        else:
            if finite:
                fac = 0.9 * err ** (-0.2)
                if fac < 0.1:
                    fac = 0.1
            else:
                fac = 0.1
            h = h * fac
        if h <= h_floor and t < t_end:
            return _STATUS_STIFF, t, h, out[:idx]
    return _STATUS_OK, t, h, out[:idx]


@njit(nogil=True)
def _advance_rk4(rhs, pars, y, h, n_steps):
    n = y.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    yt = np.empty(n)
    ynew = np.empty(n)
    for _ in range(n_steps):
        _rk4_step(rhs, pars, y, h, k1, k2, k3, k4, yt, ynew)
        for j in range(n):
            y[j] = ynew[j]
    ok = True
    for j in range(n):
        if not np.isfinite(y[j]):
            ok = False
    return ok


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def _sample_times(t_end: float, sample_every: float) -> np.ndarray:
    n_mult = int(math.floor(t_end / sample_every + 1e-9))
    ts = np.arange(n_mult + 1, dtype=np.float64) * sample_every
    if t_end - ts[-1] > 1e-9 * sample_every:
        ts = np.append(ts, t_end)
    return ts


def integrate(field: VectorField, s0, spec: IntegrationSpec) -> Trajectory:
    """Integrate dy/dtau = field(y) from tau = 0 to spec.t_end.

    ``s0`` may be a raw array or a state object exposing ``as_array()``.
    Samples are recorded at multiples of ``sample_every`` (and at t_end)
    through cubic Hermite interpolation on the accepted steps.
    """
    y0 = s0.as_array() if hasattr(s0, "as_array") else np.asarray(s0, dtype=np.float64)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    if y0.shape != (field.dim,):
        raise ValueError(f"state has shape {y0.shape}, field expects ({field.dim},)")
    if not np.all(np.isfinite(y0)):
        raise ValueError("initial state has non-finite components")
    ts = _sample_times(spec.t_end, spec.sample_every)
    if spec.method == "rk4":
        status, t_last, out = _drive_rk4(field.kernel, field.pars, y0, spec.step, spec.t_end, ts)
    else:
        status, t_last, h_last, out = _drive_rk45(
            field.kernel, field.pars, y0, spec.step, spec.rel_tol, spec.abs_tol,
            spec.t_end, ts, H_FLOOR, MAX_ADAPTIVE_STEPS,
        )
        if status == _STATUS_STIFF:
            raise StiffnessError(t_last, h_last)
    if status == _STATUS_DIVERGED:
        raise IntegrationDivergedError(t_last)
    return Trajectory(times=ts[: out.shape[0]], states=out, params=field.params, spec=spec)


def hermite_interpolate(theta, h, y0, f0, y1, f1) -> np.ndarray:
    """Dense-output value at fraction theta of a step of size h."""
    out = np.empty(len(y0))
    _hermite(float(theta), float(h), np.asarray(y0, float), np.asarray(f0, float),
             np.asarray(y1, float), np.asarray(f1, float), out)
    return out


def refine_crossing(field: VectorField, t0: float, y0, t1: float, y1, g,
                    gtol: float = 1e-10, max_iter: int = 200):
    """Locate the zero of g along one accepted step.

    (t0, y0) and (t1, y1) must be the endpoints of a single step with
    g(y0) * g(y1) < 0. The crossing is found on the cubic Hermite dense
    output by a secant/bisection hybrid; returns (tau_star, state_star)
    with |g(state_star)| < gtol.
    """
    y0 = np.asarray(y0, dtype=np.float64)
    y1 = np.asarray(y1, dtype=np.float64)
    g0 = float(g(y0))
    g1 = float(g(y1))
    if not (g0 * g1 < 0.0):
        raise CrossingPreconditionError(
            f"g does not change sign across the step (g0={g0:.3g}, g1={g1:.3g})")
    h = t1 - t0
    f0 = field(y0)
    f1 = field(y1)
    ta, ga = 0.0, g0
    tb, gb = 1.0, g1
    # previous iterate for the secant update
    tp, gp = ta, ga
    tc, gc = tb, gb
    ys = y1
    for _ in range(max_iter):
        denom = gc - gp
        if denom != 0.0:
            ts = tc - gc * (tc - tp) / denom
        else:
            ts = 0.5 * (ta + tb)
        if not (ta < ts < tb):
            ts = 0.5 * (ta + tb)
        ys = hermite_interpolate(ts, h, y0, f0, y1, f1)
        gs = float(g(ys))
        if abs(gs) < gtol:
            return t0 + ts * h, ys
        if ga * gs < 0.0:
            tb, gb = ts, gs
        else:
            ta, ga = ts, gs
        tp, gp = tc, gc
        tc, gc = ts, gs
        if tb - ta < 1e-17:
            if abs(gc) < gtol:
                return t0 + tc * h, ys
            break
    raise CrossingConvergenceError(
        f"no convergence to |g| < {gtol:g} in {max_iter} iterations")


# ---------------------------------------------------------------------------
# analytic test fields (validation hooks)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _rhs_harmonic(y, pars, out):
    out[0] = y[1]
    out[1] = -y[0]


@njit(cache=True, nogil=True)
def _rhs_rotation(y, pars, out):
    w = pars[0]
    out[0] = -w * y[1]
    out[1] = w * y[0]


@njit(cache=True, nogil=True)
def _rhs_saddle(y, pars, out):
    out[0] = y[0]
    out[1] = -y[1]


@njit(cache=True, nogil=True)
def _rhs_zero(y, pars, out):
    for j in range(y.shape[0]):
        out[j] = 0.0


def harmonic_field() -> VectorField:
    """x' = v, v' = -x; solution circles (cos, sin)-style with period 2*pi."""
    return VectorField(_rhs_harmonic, np.zeros(1), 2, "harmonic")


def rotation_field(omega: float = 1.0) -> VectorField:
    """Rigid rotation of (ax, ay) at rate omega; isometric, Lyapunov 0."""
    return VectorField(_rhs_rotation, np.array([float(omega)]), 2, "rotation")


def saddle_field() -> VectorField:
    """x' = x, y' = -y; top Lyapunov exponent exactly 1."""
    return VectorField(_rhs_saddle, np.zeros(1), 2, "saddle")


def zero_field(dim: int) -> VectorField:
    return VectorField(_rhs_zero, np.zeros(1), dim, "zero")
