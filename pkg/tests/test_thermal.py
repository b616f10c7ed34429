import math

import numpy as np
import pytest

from jcchaos import InvalidTemperatureError, Temperature, thermal_factors


def test_zero_temperature_is_exact():
    f = thermal_factors(Temperature.zero())
    assert f.sinh_theta == 0.0
    assert f.cosh_theta == 1.0


def test_beta_ln2():
    # sinh^2 = 1/(2 - 1) = 1
    f = thermal_factors(Temperature(math.log(2.0)))
    assert abs(f.sinh_theta - 1.0) < 1e-15
    assert abs(f.cosh_theta - math.sqrt(2.0)) < 1e-15


def test_beta_one():
    # frozen from direct evaluation of sinh^2 = 1/(e - 1)
    f = thermal_factors(Temperature(1.0))
    assert abs(f.sinh_theta - 0.7628739783668902) < 1e-12
    assert abs(f.cosh_theta - 1.2577665549971213) < 1e-12


def test_beta_100_asymptotic():
    # sinh ~ e^(-beta/2) for large beta
    f = thermal_factors(Temperature(100.0))
    assert abs(f.sinh_theta / math.exp(-50.0) - 1.0) < 1e-6
    assert abs(f.cosh_theta - 1.0) < 1e-12


def test_identity_over_log_spaced_betas():
    betas = np.geomspace(1e-3, 1e3, 1000)
    for b in betas:
        f = thermal_factors(Temperature(float(b)))
        assert abs(f.cosh_theta ** 2 - f.sinh_theta ** 2 - 1.0) < 1e-12


def test_sinh_strictly_decreasing_in_beta():
    betas = np.geomspace(1e-3, 1e3, 500)
    vals = [thermal_factors(Temperature(float(b))).sinh_theta for b in betas]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_zero_temperature_boundary_continuity():
    # beta = 700 is representable and tiny; far beyond the subnormal
    # range it underflows to exact zero, never to NaN
    f = thermal_factors(Temperature(700.0))
    assert 0.0 < f.sinh_theta < 1e-100
    assert abs(f.cosh_theta - 1.0) < 1e-100
    g = thermal_factors(Temperature(3200.0))
    assert g.sinh_theta == 0.0
    assert g.cosh_theta == 1.0
    assert not math.isnan(g.sinh_theta)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), "hot", None])
def test_invalid_temperatures_rejected(bad):
    with pytest.raises(InvalidTemperatureError):
        Temperature(bad)
