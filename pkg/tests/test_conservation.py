"""Long-run conservation of the flow's first integrals.

The zero-temperature flow conserves the rotating-frame energy, the
excitation, and the Bloch norm; the consistent thermal flow conserves
their Bogoliubov-mixed analogues, the Bloch norm, and two linear
combinations that decouple the tilde sector.
"""

import numpy as np
import pytest

from jcchaos import (
    IntegrationSpec,
    SystemParams,
    Temperature,
    integrate,
    thermal_factors,
    thermal_field,
    zero_t_field,
)
from jcchaos.model import (
    energy_thermal_rows,
    energy_zero_t_rows,
    excitation_thermal_rows,
    excitation_zero_t_rows,
    spin_norm_rows,
)

from oracles import random_thermal_states, random_zero_t_states

SPEC = IntegrationSpec(method="rk4", step=1e-3, t_end=1000.0, sample_every=1.0)


def _drift(series):
    return float(np.max(np.abs(series - series[0])))


def test_zero_t_first_integrals_over_tau_1000():
    pr = SystemParams(delta=1.92, alpha=1e-3)
    fld = zero_t_field(pr)
    for y0 in random_zero_t_states(6, seed=42):
        traj = integrate(fld, y0, SPEC)
        e = energy_zero_t_rows(traj.states, pr.alpha, pr.delta)
        n = excitation_zero_t_rows(traj.states)
        assert _drift(e) < 1e-8 * (abs(e[0]) + 1.0)
        assert _drift(n) < 1e-8 * (abs(n[0]) + 1.0)
        assert np.max(np.abs(spin_norm_rows(traj.states) - 1.0)) < 1e-9


@pytest.mark.parametrize("beta", [0.5, 2.0, 20.0])
def test_thermal_consistent_invariants_over_tau_1000(beta):
    pr = SystemParams(delta=1.92, alpha=1e-3, temperature=Temperature(beta),
                      variant="consistent")
    f = thermal_factors(pr.temperature)
    fld = thermal_field(pr, f)
    # physical field amplitudes (|a| ~ 1 as in the reference runs); far
    # larger drives would need a smaller step for the same drift bound
    for y0 in random_thermal_states(2, seed=int(beta * 10), field_max=1.0):
        traj = integrate(fld, y0, SPEC)
        st = traj.states
        assert np.max(np.abs(spin_norm_rows(st) - 1.0)) < 1e-9
        e = energy_thermal_rows(st, pr.alpha, pr.delta, f)
        n = excitation_thermal_rows(st, f)
        assert _drift(e) < 1e-8 * (abs(e[0]) + 1.0)
        assert _drift(n) < 1e-8 * (abs(n[0]) + 1.0)
        # tilde-decoupling combinations are constants of the motion
        c1 = f.sinh_theta * st[:, 6] + f.cosh_theta * st[:, 8]
        c2 = f.sinh_theta * st[:, 7] - f.cosh_theta * st[:, 9]
        assert _drift(c1) < 1e-9 * (abs(c1[0]) + 1.0)
        assert _drift(c2) < 1e-9 * (abs(c2[0]) + 1.0)
        # the tilde momentum never moves
        assert np.all(st[:, 2] == st[0, 2])


def test_section_parameters_run_clean_to_tau_1000():
    pr = SystemParams(delta=1.92, alpha=1e-3)
    y0 = np.array([0.0, 2.0, np.sqrt(1 - 0.8660254 ** 2), 0.0, -0.8660254, 1.0, 0.0])
    traj = integrate(zero_t_field(pr), y0, SPEC)
    assert traj.times[-1] == pytest.approx(1000.0, abs=0)
    assert np.max(np.abs(spin_norm_rows(traj.states) - 1.0)) < 1e-9
