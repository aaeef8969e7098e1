"""Explicit RK4 stepping of the Galerkin ODE system."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import BlowUpError, InvalidArgument, NumericError
from .model import PhysicalParams, State, strain_rate, sym_gradient
from .spectral import TWO_PI, SpectralGrid

BLOWUP_FACTOR = 1e12
# fraction of dt below which the remaining interval counts as already covered
_END_TOL = 1e-9


def _finite(*arrays) -> bool:
    return all(np.all(np.isfinite(a)) for a in arrays)


def rk4_step(state, dt: float, rhs: Callable):
    """One classical Runge-Kutta step of ``(u, sigma)``.

    ``rhs(state) -> (du, dsigma)``.  Works for any state type exposing
    ``u``, ``sigma`` and ``t`` with a ``(u, sigma, t)`` constructor.
    """
    if not dt > 0:
        raise InvalidArgument(f"dt must be > 0, got {dt}")
    cls = type(state)
    u0, s0, t0 = state.u, state.sigma, state.t

    def stage(u, s, t):
        try:
            du, ds = rhs(cls(u, s, t))
        except NumericError as exc:
            raise BlowUpError(f"non-finite stage at t={t}: {exc}", time=t, last_good=state) from exc
        if not _finite(du, ds):
            raise BlowUpError(f"non-finite stage at t={t}", time=t, last_good=state)
        return du, ds

    h = 0.5 * dt
    k1u, k1s = stage(u0, s0, t0)
    k2u, k2s = stage(u0 + h * k1u, s0 + h * k1s, t0 + h)
    k3u, k3s = stage(u0 + h * k2u, s0 + h * k2s, t0 + h)
    k4u, k4s = stage(u0 + dt * k3u, s0 + dt * k3s, t0 + dt)
    w = dt / 6.0
    u1 = u0 + w * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    s1 = s0 + w * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    if not _finite(u1, s1):
        raise BlowUpError(f"non-finite state at t={t0 + dt}", time=t0 + dt, last_good=state)
    return cls(u1, s1, t0 + dt)


def suggest_dt(state: State, params: PhysicalParams, grid: SpectralGrid,
               safety: float = 0.25, strain_variant: str = "simplified") -> float:
    """Step bounded by the elastic-wave and stress-relaxation timescales.

    The wave bound carries the Voigt factor ``sqrt(1 + 4 pi^2 alpha^2 N^2)``
    because the inverse operator softens the stiff high-wavenumber modes.
    """
    if not 0 < safety <= 1:
        raise InvalidArgument(f"safety must lie in (0, 1], got {safety}")
    N = grid.N
    wave = math.sqrt(1.0 + (TWO_PI * params.alpha * N) ** 2) / (TWO_PI * N * math.sqrt(params.E_mod))
    Dmax = float(np.max(strain_rate(sym_gradient(grid, state.u), params, strain_variant)))
    relax = params.P / (params.E_mod * params.e_bar**2 * Dmax + np.finfo(float).tiny)
    return safety * min(wave, relax)


@dataclass
class Trajectory:
    """Result of :func:`run_simulation`."""

    state: object
    steps: int
    callback_times: list = field(default_factory=list)


def _scale(state) -> float:
    s = max(float(np.max(np.abs(state.u), initial=0.0)), float(np.max(np.abs(state.sigma), initial=0.0)))
    return s if s > 0 else 1.0


def run_simulation(state0, T_final: float, dt: float, rhs: Callable,
                   callbacks: Iterable[Callable] = (), cadence: Optional[float] = None,
                   ) -> Trajectory:
    """Integrate from ``state0.t`` to ``T_final`` with fixed ``dt``.

    Callbacks receive the state at ``t0`` and after every step that crosses
    a multiple of ``cadence`` (measured from ``t0``), so with a cadence
    that divides the run there are ``floor((T_final - t0)/cadence) + 1``
    calls; without a cadence they run after every step.  The last step is
    shortened to land on ``T_final``.  On blow-up the raised
    :class:`BlowUpError` carries the last good state.
    """
    t0 = state0.t
    if not T_final > t0:
        raise InvalidArgument(f"T_final={T_final} must exceed the start time {t0}")
    if not dt > 0:
        raise InvalidArgument(f"dt must be > 0, got {dt}")
    callbacks = list(callbacks)
    limit = BLOWUP_FACTOR * _scale(state0)
    traj = Trajectory(state0, 0)

    def fire(s):
        for cb in callbacks:
            cb(s)
        traj.callback_times.append(s.t)

    next_fire = None
    if callbacks or cadence is not None:
        fire(state0)
        if cadence is not None:
            if not cadence > 0:
                raise InvalidArgument(f"cadence must be > 0, got {cadence}")
            next_fire = 1

    state = state0
    while True:
        remaining = T_final - state.t
        if remaining <= _END_TOL * dt:
            break
        h = dt if remaining >= dt * (1.0 - _END_TOL) else remaining
        state = rk4_step(state, h, rhs)
        traj.steps += 1
        if max(float(np.max(np.abs(state.u))), float(np.max(np.abs(state.sigma)))) > limit:
            raise BlowUpError(f"field magnitude exceeded {limit:.3g} at t={state.t}",
                              time=state.t, last_good=traj.state)
        traj.state = state
        if callbacks and cadence is None:
            fire(state)
        elif next_fire is not None:
            target = t0 + next_fire * cadence
            if state.t >= target - _END_TOL * dt:
                fire(state)
                while t0 + next_fire * cadence <= state.t + _END_TOL * dt:
                    next_fire += 1
    return traj
