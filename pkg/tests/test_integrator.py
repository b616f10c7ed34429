import math

import numpy as np
import pytest
from numba import njit

from jcchaos import (
    CrossingConvergenceError,
    CrossingPreconditionError,
    IntegrationDivergedError,
    IntegrationSpec,
    StiffnessError,
    Trajectory,
    VectorField,
    harmonic_field,
    integrate,
    refine_crossing,
    rotation_field,
    zero_field,
)
from jcchaos.integrate import hermite_interpolate


@njit(nogil=True)
def _rhs_blowup(y, pars, out):
    out[0] = y[0] * y[0]


@njit(nogil=True)
def _rhs_switch(y, pars, out):
    out[0] = 1.0 if y[0] < 1.0 else -1.0


@njit(nogil=True)
def _rhs_unit_speed(y, pars, out):
    out[0] = 1.0


def _harmonic_error(h):
    spec = IntegrationSpec(method="rk4", step=h, t_end=2 * math.pi,
                           sample_every=math.pi / 2)
    traj = integrate(harmonic_field(), np.array([1.0, 0.0]), spec)
    return float(np.max(np.abs(traj.states[-1] - np.array([1.0, 0.0]))))


def test_harmonic_one_period():
    assert _harmonic_error(1e-3) < 1e-10


def test_rk4_order_four():
    # halving h cuts the global error ~16x
    errs = [_harmonic_error(h) for h in (4e-3, 2e-3, 1e-3)]
    for big, small in zip(errs, errs[1:]):
        assert 16.0 / 1.3 < big / small < 16.0 * 1.3


def test_zero_field_constant_trajectory():
    y0 = np.array([0.3, -1.2, 7.0])
    spec = IntegrationSpec(method="rk4", step=1e-2, t_end=5.0, sample_every=0.5)
    traj = integrate(zero_field(3), y0, spec)
    assert np.all(traj.states == y0)


def test_bitwise_determinism():
    spec = IntegrationSpec(method="rk4", step=1e-3, t_end=10.0, sample_every=0.1)
    a = integrate(harmonic_field(), np.array([1.0, 0.0]), spec)
    b = integrate(harmonic_field(), np.array([1.0, 0.0]), spec)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.times, b.times)


def test_rk45_harmonic_accuracy():
    spec = IntegrationSpec(method="rk45", step=1e-2, rel_tol=1e-10,
                           abs_tol=1e-12, t_end=20 * math.pi, sample_every=math.pi)
    traj = integrate(harmonic_field(), np.array([1.0, 0.0]), spec)
    assert np.max(np.abs(traj.states[-1] - np.array([1.0, 0.0]))) < 1e-8


def test_adaptive_and_fixed_agree_on_reference_run():
    from jcchaos import SystemParams, zero_t_field

    pr = SystemParams(delta=1.92, alpha=1e-3)
    fld = zero_t_field(pr)
    y0 = np.array([0.0, 2.0, math.sqrt(1 - 0.8660254 ** 2), 0.0, -0.8660254,
                   1.0, 0.0])
    fixed = integrate(fld, y0, IntegrationSpec(method="rk4", step=1e-3,
                                               t_end=100.0, sample_every=10.0))
    adapt = integrate(fld, y0, IntegrationSpec(method="rk45", step=1e-3,
                                               rel_tol=1e-10, abs_tol=1e-12,
                                               t_end=100.0, sample_every=10.0))
    assert np.max(np.abs(fixed.states[-1] - adapt.states[-1])) < 1e-6


def test_divergence_error_carries_last_tau():
    fld = VectorField(_rhs_blowup, np.zeros(1), 1, "blowup")
    spec = IntegrationSpec(method="rk4", step=1e-3, t_end=2.0, sample_every=0.1)
    with pytest.raises(IntegrationDivergedError) as err:
        integrate(fld, np.array([1.0]), spec)
    # 1/(1-t) blows up at t = 1
    assert 0.9 < err.value.last_tau < 1.1


def test_adaptive_stiffness_error():
    fld = VectorField(_rhs_switch, np.zeros(1), 1, "switch")
    spec = IntegrationSpec(method="rk45", step=1e-2, rel_tol=1e-12,
                           abs_tol=1e-14, t_end=5.0, sample_every=0.5)
    with pytest.raises(StiffnessError):
        integrate(fld, np.array([0.0]), spec)


def test_sampling_hits_final_time():
    spec = IntegrationSpec(method="rk4", step=1e-3, t_end=1.05, sample_every=0.5)
    traj = integrate(harmonic_field(), np.array([1.0, 0.0]), spec)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(1.05, abs=0)


def test_trajectory_invariants():
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 0.0]), states=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 1.0]), states=np.zeros((3, 2)))
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 1.0]),
                   states=np.array([[0.0, 0.0], [np.nan, 0.0]]))


def test_spec_validation():
    with pytest.raises(ValueError):
        IntegrationSpec(method="euler")
    with pytest.raises(ValueError):
        IntegrationSpec(step=-1e-3)
    with pytest.raises(ValueError):
        IntegrationSpec(rel_tol=1e-1)
    with pytest.raises(ValueError):
        IntegrationSpec(t_end=0.0)


class TestRefineCrossing:
    def test_rotation_first_upward_crossing(self):
        # exact-circle endpoints around tau = 2*pi; the Hermite dense
        # output locates the upward zero of ay to o(h^4)
        fld = rotation_field()
        t0, t1 = 2 * math.pi - 0.006, 2 * math.pi + 0.004
        y0 = np.array([math.cos(t0), math.sin(t0)])
        y1 = np.array([math.cos(t1), math.sin(t1)])
        tau, y = refine_crossing(fld, t0, y0, t1, y1, lambda s: s[1])
        assert abs(tau - 2 * math.pi) < 1e-8
        assert abs(y[1]) < 1e-10

    def test_linear_g_is_exact(self):
        # with unit-speed motion g is linear in tau: the first secant
        # lands on the root up to round-off
        fld = VectorField(_rhs_unit_speed, np.zeros(1), 1, "unit_speed")
        t0, t1 = 0.0, 1.0
        y0, y1 = np.array([0.0]), np.array([1.0])
        level = 0.372901
        tau, y = refine_crossing(fld, t0, y0, t1, y1, lambda s: s[0] - level)
        assert tau == pytest.approx(level, abs=1e-15)
        assert abs(y[0] - level) < 1e-15

    def test_random_cubic_vs_dense_oracle(self):
        rng = np.random.default_rng(19)
        fld = VectorField(_rhs_unit_speed, np.zeros(1), 1, "unit_speed")
        f0 = np.array([1.0])
        f1 = np.array([1.0])
        for _ in range(25):
            c = rng.uniform(-2, 2, size=4)
            y0 = np.array([0.0])
            y1 = np.array([1.0])

            def g(s, c=c):
                u = s[0]
                return ((c[0] * u + c[1]) * u + c[2]) * u + c[3]

            if g(y0) * g(y1) >= 0:
                continue
            tau, y = refine_crossing(fld, 0.0, y0, 1.0, y1, g)
            assert abs(g(y)) < 1e-10
            # brute-force oracle at 1e-6 resolution: coarse bracket, then
            # a dense sweep inside it
            coarse = np.linspace(0.0, 1.0, 1001)
            cv = np.array([g(hermite_interpolate(t, 1.0, y0, f0, y1, f1))
                           for t in coarse])
            j = int(np.flatnonzero(np.sign(cv[:-1]) * np.sign(cv[1:]) < 0)[0])
            fine = np.linspace(coarse[j], coarse[j + 1], 1001)
            fv = np.array([g(hermite_interpolate(t, 1.0, y0, f0, y1, f1))
                           for t in fine])
            k = int(np.flatnonzero(np.sign(fv[:-1]) * np.sign(fv[1:]) < 0)[0])
            assert fine[k] - 1e-9 <= tau <= fine[k + 1] + 1e-9

    def test_no_sign_change_is_precondition_error(self):
        fld = rotation_field()
        y0 = np.array([1.0, 0.5])
        y1 = np.array([1.0, 0.25])
        with pytest.raises(CrossingPreconditionError):
            refine_crossing(fld, 0.0, y0, 0.01, y1, lambda s: s[1])

    def test_nonconvergence_reported(self):
        # a g that never gets small in magnitude cannot converge
        fld = VectorField(_rhs_unit_speed, np.zeros(1), 1, "unit_speed")
        y0, y1 = np.array([0.0]), np.array([1.0])

        def g(s):
            return 1.0 if s[0] > 0.3729 else -1.0

        with pytest.raises(CrossingConvergenceError):
            refine_crossing(fld, 0.0, y0, 1.0, y1, g)
