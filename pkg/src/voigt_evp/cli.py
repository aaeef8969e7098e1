"""Command-line entry point ``voigt-evp``.

Exit codes: 0 success, 1 check failed, 2 config error, 3 blow-up, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import experiments
from .config import load_config, serialize_config
from .diagnostics import hibler_residual
from .errors import BlowUpError, ConfigError, InvalidArgument
from .fileio import write_table
from .illposed import Background1D, run_instability_experiment
from .integrate import run_simulation
from .model import ForcingSpec, VoigtEVP, rest_state
from .runner import simulate
from .spectral import make_grid

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_BLOWUP, EXIT_IO = 0, 1, 2, 3, 4


def _out_dir(args, cfg) -> str:
    d = args.out or cfg.output.directory
    os.makedirs(d, exist_ok=True)
    return d


def cmd_simulate(args, cfg) -> int:
    out = _out_dir(args, cfg)
    res = simulate(cfg, out, args.seed)
    last = res.records[-1] if res.records else None
    msg = f"simulate: {res.trajectory.steps} steps of dt={res.dt:.6g} to t={res.trajectory.state.t:.6g}"
    if last is not None:
        msg += f", E={last.E_l2:.6g}"
    print(msg)
    return EXIT_OK


def cmd_instability1d(args, cfg) -> int:
    lab = cfg.lab1d
    bg = Background1D(lab.ubar_x, lab.sigbar, lab.P, lab.eps)
    results = run_instability_experiment(bg, lab.k_list, lab.T, lab.dt, lab.seed_amp, lab.alpha)
    out = _out_dir(args, cfg)
    write_table(os.path.join(out, "instability1d.csv"),
                ("k", "predicted_rate", "measured_rate", "relative_error"),
                (r.as_row() for r in results))
    for r in results:
        flag = " (clipped)" if r.clipped else ""
        print(f"k={r.k:4d} predicted={r.predicted_rate:.6g} measured={r.measured_rate:.6g}"
              f" rel_err={r.relative_error:.3g}{flag}")
    return EXIT_OK


def cmd_sweep_eps(args, cfg) -> int:
    rows = experiments.sweep_eps(cfg, seed=args.seed)
    out = _out_dir(args, cfg)
    write_table(os.path.join(out, "sweep_eps.csv"), experiments.EPS_COLUMNS, (r.as_row() for r in rows))
    for r in rows:
        print(f"eps {r.a:g} vs {r.b:g}: du_H1={r.du_H1:.6g} dsigma_H1={r.dsigma_H1:.6g}")
    return EXIT_OK


def cmd_sweep_n(args, cfg) -> int:
    rows = experiments.sweep_resolution(cfg, seed=args.seed)
    out = _out_dir(args, cfg)
    write_table(os.path.join(out, "sweep_n.csv"), experiments.RESOLUTION_COLUMNS,
                ((int(r.a), int(r.b), r.du_H1, r.dsigma_H1) for r in rows))
    for r in rows:
        print(f"N {int(r.a)} vs {int(r.b)}: du_H1={r.du_H1:.6g} dsigma_H1={r.dsigma_H1:.6g}")
    return EXIT_OK


def cmd_twin(args, cfg) -> int:
    res = experiments.twin_stability(cfg, seed=args.seed)
    out = _out_dir(args, cfg)
    write_table(os.path.join(out, "twin.csv"), experiments.TWIN_COLUMNS, res.rows())
    print(f"twin: delta={res.delta:g} D(0)={res.D[0]:.6g} envelope slope={res.envelope_slope:.6g}"
          f" sup K={res.K_sup:.6g}")
    return EXIT_OK


def cmd_steady_check(args, cfg) -> int:
    """Advance the rest state without forcing and report how far it drifts."""
    grid = make_grid(cfg.grid.N, cfg.grid.pad_factor)
    params = cfg.physical_params()
    state0 = rest_state(grid, params)
    rhs = VoigtEVP(grid, params, ForcingSpec(mode="zero"), cfg.strain.variant)
    dt = cfg.time.dt if cfg.time.dt != "auto" else 1e-2
    steps = args.steps
    traj = run_simulation(state0, steps * dt, dt, rhs)
    drift = max(float(np.max(np.abs(traj.state.u - state0.u))),
                float(np.max(np.abs(traj.state.sigma - state0.sigma)))) / (0.5 * params.P)
    resid = hibler_residual(grid, state0.u, state0.sigma, params, cfg.strain.variant)
    ok = drift <= 1e-12 and resid == 0.0
    out = _out_dir(args, cfg)
    with open(os.path.join(out, "steady_check.json"), "w", encoding="utf-8") as fh:
        json.dump({"steps": traj.steps, "dt": dt, "relative_drift": drift,
                   "hibler_residual": resid, "ok": ok}, fh, indent=2)
    print(f"steady-check: {traj.steps} steps, relative drift {drift:.3g}, hibler residual {resid:.3g}"
          f" -> {'ok' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_FAILED


COMMANDS = {
    "simulate": (cmd_simulate, "run one simulation, write diagnostics.csv and snapshots"),
    "instability1d": (cmd_instability1d, "1D growth rates versus the dispersion relation"),
    "sweep-eps": (cmd_sweep_eps, "differences between runs at decreasing eps"),
    "sweep-n": (cmd_sweep_n, "differences between runs at increasing cutoff N"),
    "twin": (cmd_twin, "continuous dependence on initial data"),
    "steady-check": (cmd_steady_check, "verify the rest state is a fixed point"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voigt-evp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", help="JSON config (defaults when omitted)")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides output.directory)")
        p.add_argument("--seed", type=int, default=None, metavar="U64",
                       help="seed for random initial data and perturbations")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="set a config entry by dotted path, e.g. grid.N=16 (repeatable)")
        p.add_argument("--print-config", action="store_true", help="print the resolved config first")
        if name == "steady-check":
            p.add_argument("--steps", type=int, default=1000)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.override)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.print_config:
        print(serialize_config(cfg))
    handler = COMMANDS[args.command][0]
    try:
        return handler(args, cfg)
    except BlowUpError as exc:
        t = "unknown" if exc.time is None else f"{exc.time:.6g}"
        print(f"blow-up detected at t={t}: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (ConfigError, InvalidArgument) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
