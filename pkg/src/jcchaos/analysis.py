"""Chaos diagnostics: Poincare surface sections, the maximum Lyapunov
exponent by two-trajectory renormalization, Levy-flight statistics, and
grid sweeps over (delta, beta, p0).

Every diagnostic is a pure function of its inputs; sweep cells are
independent and merged by index, so results do not depend on the number
of worker threads. Transient discarding defaults to 0 here; the
experiment layer (config/CLI) applies its own default of tau < 100.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numba import njit

from .errors import (
    IntegrationDivergedError,
    RenormalizationError,
    SamplingResolutionError,
)
from .integrate import (
    IntegrationSpec,
    Trajectory,
    VectorField,
    _advance_rk4,
    _rk4_step,
    integrate,
    refine_crossing,
)
from .model import (
    SystemParams,
    ThermalState,
    ZeroTState,
    THERMAL_FIELDS,
    ZERO_T_FIELDS,
    thermal_field,
    zero_t_field,
)

TWO_PI = 2.0 * math.pi

#: default flight threshold: five optical wavelengths of accumulated travel
DEFAULT_MIN_FLIGHT = 10.0 * math.pi
DEFAULT_P_THRESHOLD = 0.1


# ---------------------------------------------------------------------------
# Poincare sections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SectionDef:
    """Which surface to section on and how to project the hits.

    function 'ay_zero_up' takes g = ay with upward crossings, and
    'cosx_zero_up' g = cos(x) likewise; both carry their direction in the
    name. 'custom' sections use (component, level, direction). The
    default projection is (x mod 2pi, p).
    """

    function: str = "ay_zero_up"
    component: int = -1
    level: float = 0.0
    direction: str = "up"
    project: tuple = ("x_mod_2pi", "p")

    def __post_init__(self):
        if self.function not in ("ay_zero_up", "cosx_zero_up", "custom"):
            raise ValueError(f"unknown section function {self.function!r}")
        if self.direction not in ("up", "down", "both"):
            raise ValueError(f"direction must be up/down/both, got {self.direction!r}")
        if self.function == "custom" and self.component < 0:
            raise ValueError("custom section needs a component index")
        if len(self.project) != 2:
            raise ValueError("project must name two components")


@dataclass
class PoincareSection:
    """Refined section hits projected to the plane; count == len(points).

    ``states`` keeps the full refined crossing states (one row per hit)
    for invariant checks and custom projections.
    """

    points: np.ndarray
    taus: np.ndarray
    section: SectionDef
    count: int
    no_crossings: bool = False
    states: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        self.taus = np.asarray(self.taus, dtype=np.float64)
        if self.count != self.points.shape[0]:
            raise ValueError("count does not match number of points")
        if self.points.size and not np.all(np.isfinite(self.points)):
            raise ValueError("non-finite section point")


_DIR_CODE = {"up": 1, "down": -1, "both": 0}


def _resolve_section(section: SectionDef, layout: Sequence[str]):
    if section.function == "ay_zero_up":
        return 0, layout.index("ay"), 0.0, 1
    if section.function == "cosx_zero_up":
        return 1, 0, 0.0, 1
    return 0, section.component, section.level, _DIR_CODE[section.direction]


def _selector(sel, layout: Sequence[str]) -> Callable[[np.ndarray], float]:
    if isinstance(sel, (int, np.integer)):
        j = int(sel)
        return lambda y: y[j]
    if sel == "x_mod_2pi":
        return lambda y: math.fmod(y[0], TWO_PI) % TWO_PI
    j = list(layout).index(sel)
    return lambda y: y[j]


@njit(nogil=True)
def _geval(kind, comp, level, y):
    if kind == 1:
        return np.cos(y[0]) - level
    return y[comp] - level


@njit(nogil=True)
def _drive_rk4_brackets(rhs, pars, y0, h, t_max, gk, gc, gl, gd, t_min, max_hits):
    n = y0.shape[0]
    t0s = np.empty(max_hits)
    t1s = np.empty(max_hits)
    ys0 = np.empty((max_hits, n))
    ys1 = np.empty((max_hits, n))
    y = y0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    yt = np.empty(n)
    ynew = np.empty(n)
    g0 = _geval(gk, gc, gl, y)
    k = 0
    hits = 0
    t0 = 0.0
    while t0 < t_max and hits < max_hits:
        t1 = (k + 1) * h
        if t1 > t_max:
            t1 = t_max
        hs = t1 - t0
        if hs <= 0.0:
            break
        _rk4_step(rhs, pars, y, hs, k1, k2, k3, k4, yt, ynew)
        for j in range(n):
            if not np.isfinite(ynew[j]):
                return 1, t0, hits, t0s, t1s, ys0, ys1
        g1 = _geval(gk, gc, gl, ynew)
        if gd > 0:
            hit = (g0 < 0.0) and (g1 > 0.0)
        elif gd < 0:
            hit = (g0 > 0.0) and (g1 < 0.0)
        else:
            hit = g0 * g1 < 0.0
        if hit and t0 >= t_min:
            t0s[hits] = t0
            t1s[hits] = t1
            for j in range(n):
                ys0[hits, j] = y[j]
                ys1[hits, j] = ynew[j]
            hits += 1
        for j in range(n):
            y[j] = ynew[j]
        g0 = g1
        k += 1
        t0 = t1
    return 0, t0, hits, t0s, t1s, ys0, ys1


def section_points(fld: VectorField, y0: np.ndarray, section: SectionDef,
                   layout: Sequence[str], n_points: int, t_max: float,
                   h: float = 1e-3, transient: float = 0.0) -> PoincareSection:
    """Field-level section extraction; ``poincare`` wraps it for the model."""
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    gk, gc, gl, gd = _resolve_section(section, layout)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    status, t_last, hits, t0s, t1s, ys0, ys1 = _drive_rk4_brackets(
        fld.kernel, fld.pars, y0, h, t_max, gk, gc, gl, gd, transient, n_points)
    if status == 1:
        raise IntegrationDivergedError(t_last)

    if gk == 1:
        g = lambda y: math.cos(y[0]) - gl
    else:
        g = lambda y: y[gc] - gl
    proj_u = _selector(section.project[0], layout)
    proj_v = _selector(section.project[1], layout)

    pts = np.empty((hits, 2))
    taus = np.empty(hits)
    states = np.empty((hits, fld.dim))
    for i in range(hits):
        tau_star, y_star = refine_crossing(fld, t0s[i], ys0[i], t1s[i], ys1[i], g)
        pts[i, 0] = proj_u(y_star)
        pts[i, 1] = proj_v(y_star)
        taus[i] = tau_star
        states[i] = y_star
    return PoincareSection(points=pts, taus=taus, section=section,
                           count=hits, no_crossings=(hits == 0), states=states)


def poincare(params: SystemParams, s0: Union[ZeroTState, ThermalState],
             section: SectionDef, n_points: int, t_max: float,
             h: float = 1e-3, transient: float = 0.0) -> PoincareSection:
    """Poincare surface of section for the physical system.

    Crossings are detected between accepted RK4 steps and refined on the
    dense output; hits before ``transient`` are discarded. Zero crossings
    is not an error: the result comes back flagged instead.
    """
    fld, layout = _field_for_state(params, s0)
    return section_points(fld, s0.as_array(), section, layout, n_points,
                          t_max, h=h, transient=transient)


def _field_for_state(params: SystemParams, s0):
    if isinstance(s0, ZeroTState):
        return zero_t_field(params), ZERO_T_FIELDS
    if isinstance(s0, ThermalState):
        return thermal_field(params), THERMAL_FIELDS
    raise TypeError(f"expected ZeroTState or ThermalState, got {type(s0).__name__}")


# ---------------------------------------------------------------------------
# maximum Lyapunov exponent (two-trajectory renormalization)
# ---------------------------------------------------------------------------


@dataclass
class LyapunovEstimate:
    """Estimate plus its running history at each renormalization."""

    lambda_max: float
    history: np.ndarray
    n_renorm: int
    d0: float
    renorm_interval: float
    seed: int = 0

    def __post_init__(self):
        self.history = np.asarray(self.history, dtype=np.float64)
        if self.history.shape[0] != self.n_renorm:
            raise ValueError("history length must equal n_renorm")
        if self.history.size and self.lambda_max != self.history[-1]:
            raise ValueError("lambda_max must equal the final history entry")


@njit(nogil=True)
def _drive_benettin(rhs, pars, ya, yb, h, m_steps, n_renorm, d0):
    n = ya.shape[0]
    lns = np.empty(n_renorm)
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    yt = np.empty(n)
    ynew = np.empty(n)
    for leg in range(n_renorm):
        for _ in range(m_steps):
            _rk4_step(rhs, pars, ya, h, k1, k2, k3, k4, yt, ynew)
            for j in range(n):
                ya[j] = ynew[j]
            _rk4_step(rhs, pars, yb, h, k1, k2, k3, k4, yt, ynew)
            for j in range(n):
                yb[j] = ynew[j]
        ok = True
        d2 = 0.0
        for j in range(n):
            if not np.isfinite(ya[j]):
                ok = False
            dj = yb[j] - ya[j]
            d2 += dj * dj
        d = np.sqrt(d2)
        if not ok:
            return 1, leg, lns, d
        if (not np.isfinite(d)) or d <= 0.0:
            return 3, leg, lns, d
        lns[leg] = np.log(d / d0)
        sc = d0 / d
        for j in range(n):
            yb[j] = ya[j] + (yb[j] - ya[j]) * sc
    return 0, n_renorm, lns, d0


def benettin(fld: VectorField, y0: np.ndarray, d0: float, renorm_interval: float,
             n_renorm: int, seed: int, h: float = 1e-3,
             transient: float = 0.0) -> LyapunovEstimate:
    """Field-level Benettin estimator; ``lyapunov_max`` wraps it."""
    if not (1e-10 <= d0 <= 1e-6):
        raise ValueError(f"d0 must lie in [1e-10, 1e-6], got {d0!r}")
    if n_renorm < 100:
        raise ValueError(f"n_renorm must be >= 100, got {n_renorm!r}")
    m = max(1, int(round(renorm_interval / h)))
    interval = m * h

    y = np.ascontiguousarray(y0, dtype=np.float64).copy()
    if transient > 0.0:
        n_t = int(round(transient / h))
        if not _advance_rk4(fld.kernel, fld.pars, y, h, n_t):
            raise IntegrationDivergedError(n_t * h)

    rng = np.random.default_rng(seed)
    u = rng.standard_normal(y.shape[0])
    u /= np.linalg.norm(u)
    yp = y + d0 * u
    if fld.spin_slice is not None:
        a, b = fld.spin_slice  # half-open [a, b): the Bloch block
        yp[a:b] /= np.linalg.norm(yp[a:b])

    status, leg, lns, d_last = _drive_benettin(
        fld.kernel, fld.pars, y, yp, h, m, n_renorm, d0)
    tau = transient + leg * interval
    if status == 1:
        raise IntegrationDivergedError(tau)
    if status == 3:
        raise RenormalizationError("separation under/overflow", tau, d_last)
    history = np.cumsum(lns) / ((np.arange(n_renorm) + 1) * interval)
    return LyapunovEstimate(lambda_max=float(history[-1]), history=history,
                            n_renorm=n_renorm, d0=d0,
                            renorm_interval=interval, seed=seed)


def lyapunov_max(params: SystemParams, s0: Union[ZeroTState, ThermalState],
                 d0: float = 1e-8, renorm_interval: float = 1.0,
                 n_renorm: int = 2000, seed: int = 0, h: float = 1e-3,
                 transient: float = 0.0) -> LyapunovEstimate:
    """Maximum Lyapunov exponent, in units of 1/tau.

    The reference orbit starts at s0 (after an optional transient); a
    companion is displaced by d0 along a seeded random unit direction
    with its Bloch block renormalized back to the sphere. Every
    renorm_interval the log-stretch is banked and the separation is
    rescaled to d0.
    """
    fld, _ = _field_for_state(params, s0)
    return benettin(fld, s0.as_array(), d0, renorm_interval, n_renorm, seed,
                    h=h, transient=transient)


# ---------------------------------------------------------------------------
# Levy flights
# ---------------------------------------------------------------------------


@dataclass
class FlightStats:
    """Ballistic segments: rows of (tau_start, tau_end, dx)."""

    flights: np.ndarray
    count: int
    min_length: float
    p_threshold: float

    def __post_init__(self):
        self.flights = np.asarray(self.flights, dtype=np.float64).reshape(-1, 3)
        if self.count != self.flights.shape[0]:
            raise ValueError("count does not match number of flights")
        if self.count:
            if np.any(np.abs(self.flights[:, 2]) < self.min_length):
                raise ValueError("flight shorter than min_length recorded")
            starts = self.flights[:, 0]
            ends = self.flights[:, 1]
            if np.any(ends < starts) or np.any(starts[1:] < ends[:-1]):
                raise ValueError("flight intervals must be ordered and disjoint")


def levy_flights(traj: Trajectory, min_length: float = DEFAULT_MIN_FLIGHT,
                 p_threshold: float = DEFAULT_P_THRESHOLD,
                 transient: float = 0.0) -> FlightStats:
    """Detect ballistic excursions in a sampled trajectory.

    A flight is a maximal stretch of samples on which the momentum keeps
    one sign with |p| > p_threshold throughout and the accumulated
    displacement reaches min_length. Needs dense sampling (<= 0.1 tau
    between samples); uses columns 0 (position) and 1 (momentum), which
    both state layouts share.
    """
    t = traj.times
    if t.shape[0] < 2:
        raise SamplingResolutionError("trajectory has fewer than two samples")
    if float(np.max(np.diff(t))) > 0.1 + 1e-9:
        raise SamplingResolutionError(
            "sample spacing exceeds 0.1; rerun with sample_every <= 0.1")
    keep = t >= transient
    t = t[keep]
    x = traj.states[keep, 0]
    p = traj.states[keep, 1]
    if t.shape[0] < 2:
        raise SamplingResolutionError("no samples left after transient cut")

    cls = np.where(p > p_threshold, 1, np.where(p < -p_threshold, -1, 0))
    edges = np.flatnonzero(np.diff(cls) != 0)
    starts = np.concatenate(([0], edges + 1))
    ends = np.concatenate((edges, [cls.shape[0] - 1]))
    rows = []
    for i0, i1 in zip(starts, ends):
        if cls[i0] == 0:
            continue
        dx = x[i1] - x[i0]
        if abs(dx) >= min_length:
            rows.append((t[i0], t[i1], dx))
    flights = np.array(rows, dtype=np.float64).reshape(-1, 3)
    return FlightStats(flights=flights, count=flights.shape[0],
                       min_length=min_length, p_threshold=p_threshold)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

SWEEP_AXES = ("delta", "beta", "p0")
SWEEP_DIAGNOSTICS = ("lyapunov", "flight_count")


@dataclass
class SweepCell:
    index: tuple
    coords: dict
    value: float
    status: str
    seed: int


@dataclass
class SweepResult:
    axis_names: tuple
    axis_values: tuple
    values: np.ndarray
    cells: list


def sweep(axes: Sequence[tuple], base, diagnostic: str, threads: int = 1,
          budget: int = 100000) -> SweepResult:
    """Evaluate a diagnostic over a grid of (delta, beta, p0) overrides.

    ``base`` is an ExperimentConfig supplying everything not swept. Cells
    are independent; failures are recorded in-cell ('error: ...') without
    aborting. The merged result depends only on the grid, never on the
    thread count.
    """
    from .config import build_initial, build_params, override_axes

    if diagnostic not in SWEEP_DIAGNOSTICS:
        raise ValueError(f"diagnostic must be one of {SWEEP_DIAGNOSTICS}, got {diagnostic!r}")
    if not axes:
        raise ValueError("sweep needs at least one axis")
    names = tuple(a[0] for a in axes)
    values = tuple(tuple(float(v) for v in a[1]) for a in axes)
    for nm, vals in zip(names, values):
        if nm not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {nm!r}; allowed: {SWEEP_AXES}")
        if len(vals) < 1:
            raise ValueError(f"axis {nm!r} has no points")
    shape = tuple(len(v) for v in values)
    n_cells = int(np.prod(shape))
    if n_cells > budget:
        raise ValueError(f"sweep of {n_cells} cells exceeds budget {budget}")

    indices = list(np.ndindex(shape))

    def eval_cell(idx):
        coords = {nm: values[a][i] for a, (nm, i) in enumerate(zip(names, idx))}
        try:
            cfg = override_axes(base, coords)
            params = build_params(cfg)
            s0 = build_initial(cfg)
            if diagnostic == "lyapunov":
                est = lyapunov_max(
                    params, s0, d0=cfg.lyapunov.d0,
                    renorm_interval=cfg.lyapunov.renorm_interval,
                    n_renorm=cfg.lyapunov.n_renorm, seed=cfg.seed,
                    h=cfg.integration.step, transient=cfg.transient)
                value = est.lambda_max
            else:
                fld, _ = _field_for_state(params, s0)
                spec = IntegrationSpec(
                    method=cfg.integration.method, step=cfg.integration.step,
                    rel_tol=cfg.integration.rel_tol, abs_tol=cfg.integration.abs_tol,
                    t_end=cfg.integration.t_end,
                    sample_every=cfg.integration.sample_every)
                traj = integrate(fld, s0, spec)
                stats = levy_flights(traj, min_length=cfg.flights.min_length,
                                     p_threshold=cfg.flights.p_threshold,
                                     transient=cfg.transient)
                value = float(stats.count)
            return SweepCell(idx, coords, value, "ok", cfg.seed)
        except Exception as exc:  # failure stays in-cell
            return SweepCell(idx, coords, float("nan"), f"error: {exc}", base.seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            cells = list(ex.map(eval_cell, indices))
    else:
        cells = [eval_cell(idx) for idx in indices]

    grid = np.full(shape, np.nan)
    for c in cells:
        grid[c.index] = c.value
    return SweepResult(axis_names=names, axis_values=values, values=grid, cells=cells)
