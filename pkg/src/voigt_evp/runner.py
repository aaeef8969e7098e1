"""Turn a :class:`RunConfig` into a grid, right-hand side and initial state,
and run a single simulation with diagnostics and snapshots."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import diagnostics
from .config import RunConfig
from .errors import ConfigError
from .fileio import read_snapshot, write_diagnostics, write_snapshot
from .integrate import Trajectory, run_simulation, suggest_dt
from .model import (
    ForcingSpec,
    PhysicalParams,
    State,
    VoigtEVP,
    random_band_limited,
    random_state,
    rest_state,
    smooth_state,
)
from .spectral import SpectralGrid, make_grid


@dataclass(eq=False)
class RunSetup:
    config: RunConfig
    grid: SpectralGrid
    params: PhysicalParams
    forcing: ForcingSpec
    rhs: VoigtEVP
    state0: State
    dt: float


def initial_state(cfg: RunConfig, grid: SpectralGrid, params: PhysicalParams,
                  seed: Optional[int] = None) -> State:
    """Initial data named by ``init.preset`` plus an optional seeded perturbation."""
    ini = cfg.init
    seed = ini.seed if seed is None else seed
    if ini.preset == "rest":
        state = rest_state(grid, params)
    elif ini.preset == "smooth":
        state = smooth_state(grid, params, amp=ini.amp)
    elif ini.preset == "random":
        state = random_state(grid, params, np.random.default_rng(seed), amp=ini.amp)
    else:
        snap = read_snapshot(ini.snapshot)
        if snap.M != grid.M or snap.N != grid.N:
            raise ConfigError(f"init.snapshot: grid N={snap.N}, M={snap.M} does not match "
                              f"the configured N={grid.N}, M={grid.M}")
        state = snap.state
    if ini.perturbation_amp:
        rng = np.random.default_rng([seed, 1])
        kmax = min(grid.N, 4)
        du = ini.perturbation_amp * random_band_limited(grid, (2,), kmax, rng)
        ds = ini.perturbation_amp * params.P * random_band_limited(grid, (2, 2), kmax, rng)
        ds = 0.5 * (ds + ds.swapaxes(0, 1))
        state = State(state.u + du, state.sigma + ds, state.t)
    return state


def prepare(cfg: RunConfig, seed: Optional[int] = None, N: Optional[int] = None,
            eps: Optional[float] = None, dt: Optional[float] = None) -> RunSetup:
    """Build everything a run needs.  ``N``, ``eps`` and ``dt`` override the config."""
    grid = make_grid(cfg.grid.N if N is None else N, cfg.grid.pad_factor)
    params = cfg.physical_params()
    if eps is not None:
        params = params.with_(eps=eps)
    forcing = ForcingSpec(mode=cfg.forcing.mode, period=cfg.forcing.T_period)
    rhs = VoigtEVP(grid, params, forcing, cfg.strain.variant)
    state0 = initial_state(cfg, grid, params, seed)
    if dt is None:
        dt = (suggest_dt(state0, params, grid, cfg.time.safety, cfg.strain.variant)
              if cfg.time.dt == "auto" else cfg.time.dt)
    return RunSetup(cfg, grid, params, forcing, rhs, state0, float(dt))


@dataclass
class SimulationResult:
    trajectory: Trajectory
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    dt: float = 0.0


def simulate(cfg: RunConfig, out_dir: Optional[str] = None, seed: Optional[int] = None) -> SimulationResult:
    """Run ``cfg`` from its initial state to ``time.T_final``.

    ``time.T_final`` is an absolute time, so a run initialised from a
    snapshot continues to it.  Diagnostics are recorded at ``diag_cadence``
    (every step when unset) and written to ``diagnostics.csv``; snapshots
    go to ``snapshot_NNNNNN.bin`` at ``snapshot_cadence`` plus ``final.bin``.
    """
    setup = prepare(cfg, seed)
    grid, params = setup.grid, setup.params
    out_dir = cfg.output.directory if out_dir is None else out_dir
    formats = set(cfg.output.formats)
    if formats:
        os.makedirs(out_dir, exist_ok=True)
    result = SimulationResult(None, dt=setup.dt)

    def diag(state):
        result.records.append(diagnostics.record(grid, state, params, cfg.strain.variant))

    trajectory = _run_with_two_cadences(setup, diag, result, out_dir, "snapshot" in formats)
    result.trajectory = trajectory
    if "csv" in formats:
        write_diagnostics(result.records, os.path.join(out_dir, "diagnostics.csv"))
    if "snapshot" in formats:
        write_snapshot(trajectory.state, os.path.join(out_dir, "final.bin"), grid.N)
    return result


def _run_with_two_cadences(setup: RunSetup, diag, result, out_dir, snapshots: bool) -> Trajectory:
    cfg = setup.config
    t0 = setup.state0.t
    tol = 1e-9 * setup.dt
    snap_cad = cfg.time.snapshot_cadence if snapshots else None
    if snap_cad is None:
        return run_simulation(setup.state0, cfg.time.T_final, setup.dt, setup.rhs,
                              callbacks=[diag], cadence=cfg.time.diag_cadence)

    def snap(state):
        path = os.path.join(out_dir, f"snapshot_{len(result.snapshots):06d}.bin")
        write_snapshot(state, path, setup.grid.N)
        result.snapshots.append(path)

    # both cadences are tracked here, so the loop calls back after every step
    callbacks = [_Cadenced(diag, t0, cfg.time.diag_cadence, tol),
                 _Cadenced(snap, t0, snap_cad, tol, first=1)]
    return run_simulation(setup.state0, cfg.time.T_final, setup.dt, setup.rhs, callbacks=callbacks)


class _Cadenced:
    """Callback wrapper that fires at ``t0`` and on crossing cadence multiples."""

    def __init__(self, fn, t0: float, cadence: Optional[float], tol: float, first: int = 0):
        self.fn, self.t0, self.cadence, self.tol = fn, t0, cadence, tol
        self.next = first

    def __call__(self, state):
        if self.cadence is None:
            self.fn(state)
            return
        if state.t >= self.t0 + self.next * self.cadence - self.tol:
            self.fn(state)
            while self.t0 + self.next * self.cadence <= state.t + self.tol:
                self.next += 1
