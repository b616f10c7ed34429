import json
import math

import pytest

from jcchaos.config import (
    ExperimentConfig,
    build_initial,
    build_params,
    config_json,
    materialize,
    override_axes,
    parse_config,
)
from jcchaos.errors import ConfigError
from jcchaos.model import ThermalState, ZeroTState


def test_defaults_materialize_and_round_trip():
    cfg = parse_config({})
    echoed = materialize(cfg)
    assert echoed["params"]["beta"] == "inf"
    assert echoed["initial"]["sx"] == pytest.approx(
        math.sqrt(1 - 0.8660254 ** 2), abs=1e-15)
    again = parse_config(json.loads(config_json(cfg)))
    assert materialize(again) == echoed


def test_round_trip_with_thermal_and_sweep_axes():
    raw = {
        "params": {"delta": 1.2, "beta": 5.0, "variant": "literal"},
        "sweep": {"axes": [{"name": "beta", "values": ["inf", 2.0]},
                           {"name": "delta", "values": [0.0, 1.92]}],
                  "diagnostic": "flight_count"},
        "seed": 7,
        "transient": 50.0,
    }
    cfg = parse_config(raw)
    assert cfg.params.beta == 5.0
    assert cfg.sweep.axes[0] == ("beta", (math.inf, 2.0))
    again = parse_config(json.loads(config_json(cfg)))
    assert materialize(again) == materialize(cfg)


def test_unknown_keys_rejected_at_every_level():
    with pytest.raises(ConfigError, match="paramz"):
        parse_config({"paramz": {}})
    with pytest.raises(ConfigError, match="detla"):
        parse_config({"params": {"detla": 1.0}})
    with pytest.raises(ConfigError, match="lyapunov"):
        parse_config({"lyapunov": {"d_zero": 1e-8}})


def test_beta_encodings():
    assert parse_config({"params": {"beta": "inf"}}).params.beta == math.inf
    assert parse_config({"params": {}}).params.beta == math.inf
    assert parse_config({"params": {"beta": 2}}).params.beta == 2.0
    with pytest.raises(ConfigError):
        parse_config({"params": {"beta": "cold"}})
    with pytest.raises(ConfigError):
        parse_config({"params": {"beta": True}})


def test_initial_state_dispatch_and_sx_derivation():
    cfg = parse_config({"params": {"beta": "inf"}})
    s = build_initial(cfg)
    assert isinstance(s, ZeroTState)
    assert s.sx ** 2 + s.sy ** 2 + s.sz ** 2 == pytest.approx(1.0, abs=1e-15)
    cfg2 = parse_config({"params": {"beta": 3.0}})
    assert isinstance(build_initial(cfg2), ThermalState)


def test_overfull_spin_rejected():
    cfg = parse_config({"initial": {"sy": 0.9, "sz": 0.9}})
    with pytest.raises(ConfigError):
        build_initial(cfg)


def test_bad_params_surface_as_config_errors():
    cfg = parse_config({"params": {"alpha": -1.0}})
    with pytest.raises(ConfigError):
        build_params(cfg)


def test_override_axes():
    cfg = ExperimentConfig()
    c2 = override_axes(cfg, {"delta": 0.5, "beta": 2.0, "p0": 7.0})
    assert c2.params.delta == 0.5
    assert c2.params.beta == 2.0
    assert c2.initial.p == 7.0
    # original untouched
    assert cfg.params.delta == 1.92
