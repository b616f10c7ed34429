"""Experiment configuration: one JSON file per experiment.

Parsing is strict (unknown keys fail loudly, no silent defaulting) and
every default is materialized into the echoed config, so an echoed file
re-runs to bit-identical outputs. beta may be a number, the literal
string "inf", or simply omitted for zero temperature.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from .errors import ConfigError
from .integrate import IntegrationSpec
from .model import SystemParams, ThermalState, ZeroTState
from .thermal import Temperature

SQRT3_HALF = 0.8660254  # the inversion magnitude used throughout the reference runs


@dataclass(frozen=True)
class ParamsConfig:
    alpha: float = 1e-3
    delta: float = 1.92
    beta: float = math.inf
    variant: str = "consistent"


@dataclass(frozen=True)
class InitialConfig:
    # sx = None means "derive +sqrt(1 - sy^2 - sz^2)" so the Bloch vector
    # lands exactly on the unit sphere.
    x: float = 0.0
    p: float = 0.0
    sx: Optional[float] = None
    sy: float = 0.0
    sz: float = -SQRT3_HALF
    ax: float = 1.0
    ay: float = 0.0
    atx: float = 0.0
    aty: float = 0.0
    p_tilde: float = 0.0


@dataclass(frozen=True)
class IntegrationConfig:
    method: str = "rk4"
    step: float = 1e-3
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_end: float = 1000.0
    sample_every: float = 0.1


@dataclass(frozen=True)
class SectionConfig:
    function: str = "ay_zero_up"
    component: int = -1
    level: float = 0.0
    direction: str = "up"
    n_points: int = 1000
    t_max: Optional[float] = None  # None -> integration.t_end


@dataclass(frozen=True)
class LyapunovConfig:
    d0: float = 1e-8
    renorm_interval: float = 1.0
    n_renorm: int = 2000


@dataclass(frozen=True)
class FlightsConfig:
    min_length: float = 10.0 * math.pi
    p_threshold: float = 0.1


@dataclass(frozen=True)
class SweepConfig:
    axes: tuple = ()  # ((name, (values...)), ...)
    diagnostic: str = "lyapunov"


@dataclass(frozen=True)
class ExperimentConfig:
    params: ParamsConfig = field(default_factory=ParamsConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    section: SectionConfig = field(default_factory=SectionConfig)
    lyapunov: LyapunovConfig = field(default_factory=LyapunovConfig)
    flights: FlightsConfig = field(default_factory=FlightsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    seed: int = 1
    transient: float = 100.0
    output_path: Optional[str] = None


_BLOCKS = {
    "params": (ParamsConfig, {"alpha", "delta", "beta", "variant"}),
    "initial": (InitialConfig, {"x", "p", "sx", "sy", "sz", "ax", "ay", "atx", "aty", "p_tilde"}),
    "integration": (IntegrationConfig, {"method", "step", "rel_tol", "abs_tol", "t_end", "sample_every"}),
    "section": (SectionConfig, {"function", "component", "level", "direction", "n_points", "t_max"}),
    "lyapunov": (LyapunovConfig, {"d0", "renorm_interval", "n_renorm"}),
    "flights": (FlightsConfig, {"min_length", "p_threshold"}),
    "sweep": (SweepConfig, {"axes", "diagnostic"}),
}
_TOP_KEYS = set(_BLOCKS) | {"seed", "transient", "output_path"}


def _parse_beta(value) -> float:
    if value is None:
        return math.inf
    if isinstance(value, str):
        if value.strip().lower() == "inf":
            return math.inf
        raise ConfigError(f"params.beta: expected a number or \"inf\", got {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"params.beta: expected a number or \"inf\", got {value!r}")
    return float(value)


def _parse_block(name: str, raw: dict):
    cls, allowed = _BLOCKS[name]
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object, got {type(raw).__name__}")
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"{name}: unknown key(s) {sorted(unknown)}; allowed: {sorted(allowed)}")
    kwargs = dict(raw)
    if name == "params" and "beta" in kwargs:
        kwargs["beta"] = _parse_beta(kwargs["beta"])
    if name == "sweep" and "axes" in kwargs:
        axes = kwargs["axes"]
        if not isinstance(axes, (list, tuple)):
            raise ConfigError("sweep.axes: expected a list of {name, values} objects")
        parsed = []
        for i, ax in enumerate(axes):
            if not (isinstance(ax, dict) and set(ax) == {"name", "values"}):
                raise ConfigError(f"sweep.axes[{i}]: expected keys {{name, values}}")
            vals = tuple(_parse_beta(v) if ax["name"] == "beta" else float(v)
                         for v in ax["values"])
            parsed.append((str(ax["name"]), vals))
        kwargs["axes"] = tuple(parsed)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a raw dict (from JSON) into an ExperimentConfig."""
    if not isinstance(raw, dict):
        raise ConfigError(f"config root: expected an object, got {type(raw).__name__}")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"config root: unknown key(s) {sorted(unknown)}; "
                          f"allowed: {sorted(_TOP_KEYS)}")
    kwargs = {}
    for name in _BLOCKS:
        if name in raw:
            kwargs[name] = _parse_block(name, raw[name])
    if "seed" in raw:
        if isinstance(raw["seed"], bool) or not isinstance(raw["seed"], int):
            raise ConfigError(f"seed: expected an integer, got {raw['seed']!r}")
        kwargs["seed"] = raw["seed"]
    if "transient" in raw:
        kwargs["transient"] = float(raw["transient"])
    if "output_path" in raw and raw["output_path"] is not None:
        kwargs["output_path"] = str(raw["output_path"])
    return ExperimentConfig(**kwargs)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(raw)


def _derived_sx(cfg: ExperimentConfig) -> float:
    if cfg.initial.sx is not None:
        return cfg.initial.sx
    rest = 1.0 - cfg.initial.sy ** 2 - cfg.initial.sz ** 2
    if rest < -1e-12:
        raise ConfigError("initial: sy^2 + sz^2 exceeds 1; cannot derive sx")
    return math.sqrt(max(rest, 0.0))


def materialize(cfg: ExperimentConfig) -> dict:
    """Full config dict with every default (and derived sx) filled in."""
    d = asdict(cfg)
    d["initial"]["sx"] = _derived_sx(cfg)
    if math.isinf(cfg.params.beta):
        d["params"]["beta"] = "inf"
    d["sweep"]["axes"] = [
        {"name": nm, "values": ["inf" if (isinstance(v, float) and math.isinf(v)) else v
                                for v in vals]}
        for nm, vals in cfg.sweep.axes
    ]
    return d


def config_json(cfg: ExperimentConfig, compact: bool = False) -> str:
    d = materialize(cfg)
    if compact:
        return json.dumps(d, sort_keys=True, separators=(",", ":"))
    return json.dumps(d, sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def build_params(cfg: ExperimentConfig) -> SystemParams:
    try:
        return SystemParams(delta=cfg.params.delta, alpha=cfg.params.alpha,
                            temperature=Temperature(cfg.params.beta),
                            variant=cfg.params.variant)
    except Exception as exc:
        raise ConfigError(f"params: {exc}") from None


def build_initial(cfg: ExperimentConfig):
    """Initial state; zero-temperature configs get the 7-component state."""
    ini = cfg.initial
    sx = _derived_sx(cfg)
    try:
        if math.isinf(cfg.params.beta):
            return ZeroTState(x=ini.x, p=ini.p, sx=sx, sy=ini.sy, sz=ini.sz,
                              ax=ini.ax, ay=ini.ay)
        return ThermalState(x=ini.x, p=ini.p, p_tilde=ini.p_tilde, sx=sx,
                            sy=ini.sy, sz=ini.sz, ax=ini.ax, ay=ini.ay,
                            atx=ini.atx, aty=ini.aty)
    except ValueError as exc:
        raise ConfigError(f"initial: {exc}") from None


def build_integration_spec(cfg: ExperimentConfig) -> IntegrationSpec:
    ic = cfg.integration
    try:
        return IntegrationSpec(method=ic.method, step=ic.step, rel_tol=ic.rel_tol,
                               abs_tol=ic.abs_tol, t_end=ic.t_end,
                               sample_every=ic.sample_every)
    except ValueError as exc:
        raise ConfigError(f"integration: {exc}") from None


def override_axes(cfg: ExperimentConfig, coords: dict) -> ExperimentConfig:
    """Apply sweep-axis coordinates {delta|beta|p0: value} to a config."""
    params = cfg.params
    initial = cfg.initial
    if "delta" in coords:
        params = replace(params, delta=float(coords["delta"]))
    if "beta" in coords:
        params = replace(params, beta=float(coords["beta"]))
    if "p0" in coords:
        initial = replace(initial, p=float(coords["p0"]))
    return replace(cfg, params=params, initial=initial)
