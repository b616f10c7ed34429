"""Command line interface: experiment subcommands, canned figure recipes,
and CSV serialization.

Every output file starts with a metadata header (package version, model
variant, seed, and the fully materialized config as one JSON line) and
uses 17-significant-digit floats, so identical invocations produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .analysis import (
    SectionDef,
    levy_flights,
    lyapunov_max,
    poincare,
    sweep,
    _field_for_state,
)
from .config import (
    ExperimentConfig,
    build_initial,
    build_integration_spec,
    build_params,
    config_json,
    load_config,
    parse_config,
)
from .errors import ConfigError, JcChaosError
from .integrate import integrate
from .model import (
    THERMAL_FIELDS,
    ZERO_T_FIELDS,
    energy_thermal_rows,
    energy_zero_t_rows,
    excitation_thermal_rows,
    excitation_zero_t_rows,
    spin_norm_rows,
)
from .thermal import STIFF_BETA, Temperature, thermal_factors

COMMANDS = ("simulate", "poincare", "lyapunov", "flights", "sweep", "figure")


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _meta(cfg: ExperimentConfig) -> dict:
    return {
        "jcchaos": __version__,
        "variant": cfg.params.variant,
        "seed": cfg.seed,
        "config": config_json(cfg, compact=True),
    }


def _write_csv(path: str, meta: dict, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_echo(cfg: ExperimentConfig, outdir: str, name: str = "config_echo.json") -> None:
    with open(os.path.join(outdir, name), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(config_json(cfg) + "\n")


def _warn_stiff(cfg: ExperimentConfig) -> None:
    betas = [cfg.params.beta]
    for nm, vals in cfg.sweep.axes:
        if nm == "beta":
            betas.extend(vals)
    for b in betas:
        if not math.isinf(b) and b < STIFF_BETA:
            print(f"warning: beta = {b:g} is below {STIFF_BETA:g}; "
                  "the flow is stiff there, expect slow steps", file=sys.stderr)
            break


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _trajectory_rows(cfg: ExperimentConfig, traj, thermal: bool):
    states = traj.states
    if thermal:
        f = thermal_factors(Temperature(cfg.params.beta))
        e = energy_thermal_rows(states, cfg.params.alpha, cfg.params.delta, f)
        n = excitation_thermal_rows(states, f)
        layout = THERMAL_FIELDS
    else:
        e = energy_zero_t_rows(states, cfg.params.alpha, cfg.params.delta)
        n = excitation_zero_t_rows(states)
        layout = ZERO_T_FIELDS
    sn = spin_norm_rows(states)
    columns = ("tau",) + layout + ("E", "N", "snorm")
    rows = []
    for i in range(len(traj)):
        rows.append([float(traj.times[i])] + [float(v) for v in states[i]]
                    + [float(e[i]), float(n[i]), float(sn[i])])
    return columns, rows


def _run_trajectory(cfg: ExperimentConfig):
    params = build_params(cfg)
    s0 = build_initial(cfg)
    spec = build_integration_spec(cfg)
    fld, layout = _field_for_state(params, s0)
    traj = integrate(fld, s0, spec)
    return params, s0, traj, len(layout) == 10


def cmd_simulate(cfg: ExperimentConfig, outdir: str) -> None:
    _, _, traj, thermal = _run_trajectory(cfg)
    columns, rows = _trajectory_rows(cfg, traj, thermal)
    _write_csv(os.path.join(outdir, "trajectory.csv"), _meta(cfg), columns, rows)
    _write_echo(cfg, outdir)


def _section_def(cfg: ExperimentConfig) -> SectionDef:
    sc = cfg.section
    return SectionDef(function=sc.function, component=sc.component,
                      level=sc.level, direction=sc.direction)


def cmd_poincare(cfg: ExperimentConfig, outdir: str,
                 filename: str = "section.csv") -> None:
    params = build_params(cfg)
    s0 = build_initial(cfg)
    t_max = cfg.section.t_max if cfg.section.t_max is not None else cfg.integration.t_end
    sec = poincare(params, s0, _section_def(cfg), cfg.section.n_points, t_max,
                   h=cfg.integration.step, transient=cfg.transient)
    meta = _meta(cfg)
    meta["no_crossings"] = int(sec.no_crossings)
    rows = [[float(sec.points[i, 0]), float(sec.points[i, 1]), float(sec.taus[i])]
            for i in range(sec.count)]
    _write_csv(os.path.join(outdir, filename), meta, ("u", "v", "tau"), rows)
    _write_echo(cfg, outdir)


def cmd_lyapunov(cfg: ExperimentConfig, outdir: str) -> None:
    params = build_params(cfg)
    s0 = build_initial(cfg)
    est = lyapunov_max(params, s0, d0=cfg.lyapunov.d0,
                       renorm_interval=cfg.lyapunov.renorm_interval,
                       n_renorm=cfg.lyapunov.n_renorm, seed=cfg.seed,
                       h=cfg.integration.step, transient=cfg.transient)
    rows = []
    for i in range(est.n_renorm):
        tau = cfg.transient + (i + 1) * est.renorm_interval
        rows.append([i + 1, tau, float(est.history[i])])
    _write_csv(os.path.join(outdir, "lyapunov.csv"), _meta(cfg),
               ("n", "tau", "lambda_running"), rows)
    _write_echo(cfg, outdir)


def cmd_flights(cfg: ExperimentConfig, outdir: str) -> None:
    _, _, traj, _ = _run_trajectory(cfg)
    stats = levy_flights(traj, min_length=cfg.flights.min_length,
                         p_threshold=cfg.flights.p_threshold,
                         transient=cfg.transient)
    rows = [[float(v) for v in stats.flights[i]] for i in range(stats.count)]
    _write_csv(os.path.join(outdir, "flights.csv"), _meta(cfg),
               ("tau_start", "tau_end", "dx"), rows)
    _write_echo(cfg, outdir)


def _sweep_rows(res):
    rows = []
    for cell in res.cells:
        coords = [cell.coords[nm] for nm in res.axis_names]
        rows.append(coords + [cell.value, cell.status])
    return rows


def cmd_sweep(cfg: ExperimentConfig, outdir: str, threads: int,
              filename: str = "sweep.csv") -> None:
    if not cfg.sweep.axes:
        raise ConfigError("sweep: config block 'sweep.axes' is empty")
    res = sweep(cfg.sweep.axes, cfg, cfg.sweep.diagnostic, threads=threads)
    columns = tuple(res.axis_names) + ("value", "status")
    _write_csv(os.path.join(outdir, filename), _meta(cfg), columns, _sweep_rows(res))
    _write_echo(cfg, outdir)


# ---------------------------------------------------------------------------
# canned figure recipes
# ---------------------------------------------------------------------------


def _beta_tag(beta: float) -> str:
    return "T0" if math.isinf(beta) else f"beta{beta:g}"


def _fig_sections(cfg, outdir, delta, sz, betas, n_points=1000, t_max=8000.0,
                  p0=2.0, x0=0.0):
    for beta in betas:
        c = replace(cfg,
                    params=replace(cfg.params, delta=delta, beta=beta),
                    initial=replace(cfg.initial, sz=sz, sx=None, p=p0, x=x0),
                    section=replace(cfg.section, function="ay_zero_up",
                                    n_points=n_points, t_max=t_max))
        params = build_params(c)
        s0 = build_initial(c)
        sec = poincare(params, s0, _section_def(c), n_points, t_max,
                       h=c.integration.step, transient=c.transient)
        meta = _meta(c)
        meta["no_crossings"] = int(sec.no_crossings)
        rows = [[float(sec.points[i, 0]), float(sec.points[i, 1]), float(sec.taus[i])]
                for i in range(sec.count)]
        _write_csv(os.path.join(outdir, f"section_{_beta_tag(beta)}.csv"),
                   meta, ("u", "v", "tau"), rows)


def _figure_1(cfg, outdir, threads):
    # launch from the potential hilltop so the beta dependence of the
    # stochastic layer is visible across the four panels
    _fig_sections(cfg, outdir, delta=1.92, sz=-0.863,
                  betas=[2.0, 6.0, 10.0, 12.0], x0=math.pi)


def _figure_2(cfg, outdir, threads):
    _fig_sections(cfg, outdir, delta=1.92, sz=-0.8660254, betas=[math.inf, 20.0])


# initial momentum for the flight runs: the displacement accumulated over
# the tau window then straddles the flight-length threshold, where the
# thermal field boost shows up in the counts
FIG3_P0 = 25.01


def _figure_3(cfg, outdir, threads):
    for beta in [math.inf, 100.0, 50.0, 5.0]:
        c = replace(cfg,
                    params=replace(cfg.params, delta=1.2, beta=beta),
                    initial=replace(cfg.initial, sz=-0.8660254, sx=None, p=FIG3_P0),
                    integration=replace(cfg.integration, t_end=2000.0, sample_every=0.1))
        _, _, traj, thermal = _run_trajectory(c)
        columns, rows = _trajectory_rows(c, traj, thermal)
        tag = _beta_tag(beta)
        _write_csv(os.path.join(outdir, f"flights_{tag}_trajectory.csv"),
                   _meta(c), columns, rows)
        stats = levy_flights(traj, min_length=c.flights.min_length,
                             p_threshold=c.flights.p_threshold, transient=c.transient)
        frows = [[float(v) for v in stats.flights[i]] for i in range(stats.count)]
        _write_csv(os.path.join(outdir, f"flights_{tag}.csv"), _meta(c),
                   ("tau_start", "tau_end", "dx"), frows)


def _figure_4(cfg, outdir, threads):
    deltas = tuple(round(0.25 * i, 6) for i in range(13))  # 0 .. 3
    c = replace(cfg,
                initial=replace(cfg.initial, sz=0.0, sx=None, p=2.0, x=math.pi),
                sweep=replace(cfg.sweep,
                              axes=(("delta", deltas), ("beta", (25.0, 1.0, 0.1, 0.01))),
                              diagnostic="lyapunov"))
    cmd_sweep(c, outdir, threads, filename="lyapunov_vs_delta.csv")


def _figure_5(cfg, outdir, threads):
    deltas = tuple(round(0.3 * i, 6) for i in range(10))  # 0 .. 2.7
    p0s = tuple(float(2 * i) for i in range(10))  # 0 .. 18
    for beta in [math.inf, 0.5]:
        c = replace(cfg,
                    params=replace(cfg.params, beta=beta),
                    initial=replace(cfg.initial, sz=0.0, sx=None, x=math.pi),
                    sweep=replace(cfg.sweep,
                                  axes=(("delta", deltas), ("p0", p0s)),
                                  diagnostic="lyapunov"))
        cmd_sweep(c, outdir, threads,
                  filename=f"lyapunov_delta_p0_{_beta_tag(beta)}.csv")


def _figure_6(cfg, outdir, threads):
    deltas = tuple(round(0.3 * i, 6) for i in range(10))
    betas = tuple(float(v) for v in np.geomspace(0.1, 25.0, 10).round(6))
    c = replace(cfg,
                initial=replace(cfg.initial, sz=0.0, sx=None, p=2.0, x=math.pi),
                sweep=replace(cfg.sweep,
                              axes=(("delta", deltas), ("beta", betas)),
                              diagnostic="lyapunov"))
    cmd_sweep(c, outdir, threads, filename="lyapunov_delta_beta.csv")


_FIGURES = {1: _figure_1, 2: _figure_2, 3: _figure_3, 4: _figure_4,
            5: _figure_5, 6: _figure_6}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", metavar="PATH", default=None,
                    help="experiment config JSON (defaults apply if omitted)")
    sp.add_argument("--variant", choices=("literal", "consistent"), default=None,
                    help="thermal model variant override")
    sp.add_argument("--seed", type=int, default=None, help="seed override")
    sp.add_argument("--out", metavar="DIR", default=None, help="output directory")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker threads for sweep cells")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jcchaos",
        description="Finite-temperature semiclassical cavity QED simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "integrate one trajectory and write it as CSV",
        "poincare": "extract a Poincare surface of section",
        "lyapunov": "estimate the maximum Lyapunov exponent",
        "flights": "detect Levy flights along one trajectory",
        "sweep": "evaluate a diagnostic over a parameter grid",
        "figure": "run a canned experiment preset (1-6)",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        _add_common(sp)
        if name == "figure":
            sp.add_argument("number", type=int, choices=range(1, 7))
    return parser


def _effective_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else parse_config({})
    if args.variant is not None:
        cfg = replace(cfg, params=replace(cfg.params, variant=args.variant))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _effective_config(args)
        outdir = args.out or cfg.output_path or "jcchaos_out"
        os.makedirs(outdir, exist_ok=True)
        _warn_stiff(cfg)
        if args.command == "simulate":
            cmd_simulate(cfg, outdir)
        elif args.command == "poincare":
            cmd_poincare(cfg, outdir)
        elif args.command == "lyapunov":
            cmd_lyapunov(cfg, outdir)
        elif args.command == "flights":
            cmd_flights(cfg, outdir)
        elif args.command == "sweep":
            cmd_sweep(cfg, outdir, args.threads)
        elif args.command == "figure":
            _FIGURES[args.number](cfg, outdir, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except JcChaosError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
