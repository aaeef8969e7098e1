"""Experiment drivers: the eps -> 0 sweep, Galerkin refinement in N and
twin-run continuous dependence.

Sweep members are independent runs and may execute on a thread pool
(capped by the ``VEVP_THREADS`` environment variable); results are
aggregated serially in input order, so tables do not depend on scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import RunConfig
from .errors import InvalidArgument
from .integrate import run_simulation, suggest_dt
from .model import State
from .runner import prepare
from .spectral import TWO_PI, SpectralGrid

EPS_COLUMNS = ("eps_a", "eps_b", "du_H1", "dsigma_H1")
RESOLUTION_COLUMNS = ("N_a", "N_b", "du_H1", "dsigma_H1")
TWIN_COLUMNS = ("t", "D", "K")


def thread_count(n_jobs: int) -> int:
    """Worker count for ``n_jobs`` sweep members, capped by ``VEVP_THREADS``."""
    cap = os.environ.get("VEVP_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError as exc:
            raise InvalidArgument(f"VEVP_THREADS must be an integer, got {cap!r}") from exc
    return max(1, min(n_jobs, limit))


def _map(fn, items: Sequence, threads: Optional[int] = None) -> list:
    n = thread_count(len(items)) if threads is None else max(1, threads)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# compact-layout norms --------------------------------------------------------

def _compact_weights(grid: SpectralGrid, N: int, s: int) -> np.ndarray:
    """Parseval weights ``(1 + 4 pi^2 |k|^2)^s`` for a compact block of cutoff ``N``.

    Columns ``ky > 0`` stand in for their conjugates and count twice.
    """
    kx = np.concatenate([np.arange(N + 1), np.arange(-N, 0)]).astype(float)[:, None]
    ky = np.arange(N + 1, dtype=float)[None, :]
    w = (1.0 + TWO_PI**2 * (kx**2 + ky**2)) ** s
    mult = np.full(N + 1, 2.0)
    mult[0] = 1.0
    return w * mult


def _restrict(c: np.ndarray, N_from: int, N_to: int) -> np.ndarray:
    """Keep modes ``|k|_inf <= N_to`` of a compact block of cutoff ``N_from``."""
    rows = np.r_[0:N_to + 1, 2 * N_from + 1 - N_to:2 * N_from + 1]
    return c[..., rows, : N_to + 1]


def _h1_sq(c: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sum(np.abs(c) ** 2 * weights))


def _record_times(cfg: RunConfig, n: int = 20) -> float:
    cad = cfg.sweep.record_cadence or cfg.time.diag_cadence
    return cad if cad is not None else cfg.time.T_final / n


def _trajectory_coefficients(setup, cadence: float) -> list:
    """Compact coefficients of ``(u, sigma)`` at every recorded time."""
    out = []

    def keep(state):
        g = setup.grid
        out.append((state.t, g.forward_compact(state.u), g.forward_compact(state.sigma)))

    run_simulation(setup.state0, setup.config.time.T_final, setup.dt, setup.rhs,
                   callbacks=[keep], cadence=cadence)
    return out


def _sup_difference(a: list, b: list, weights: np.ndarray, N_a: int, N_b: int, N: int) -> tuple:
    if len(a) != len(b):
        raise InvalidArgument("runs recorded different numbers of times")
    du = ds = 0.0
    for (_, ua, sa), (_, ub, sb) in zip(a, b):
        du = max(du, _h1_sq(_restrict(ua, N_a, N) - _restrict(ub, N_b, N), weights))
        ds = max(ds, _h1_sq(_restrict(sa, N_a, N) - _restrict(sb, N_b, N), weights))
    return math.sqrt(du), math.sqrt(ds)


# sweeps ---------------------------------------------------------------------

@dataclass(frozen=True)
class DifferenceRow:
    a: float
    b: float
    du_H1: float
    dsigma_H1: float

    def as_row(self) -> tuple:
        return (self.a, self.b, self.du_H1, self.dsigma_H1)


def shared_dt(cfg: RunConfig, setups: Sequence) -> float:
    """One step for every sweep member: the configured dt, or the smallest suggestion."""
    if cfg.time.dt != "auto":
        return float(cfg.time.dt)
    return min(suggest_dt(s.state0, s.params, s.grid, cfg.time.safety, cfg.strain.variant)
               for s in setups)


def sweep_eps(cfg: RunConfig, eps_list: Optional[Sequence[float]] = None,
              seed: Optional[int] = None, threads: Optional[int] = None,
              pairs: str = "consecutive") -> list:
    """Sup-in-time H1 differences between runs at different ``eps`` values.

    ``pairs="consecutive"`` compares neighbours in ``eps_list``; ``"limit"``
    compares every member with the last one; ``"all"`` gives both, in that
    order.  All members share grid, dt, forcing and initial data.
    """
    if pairs not in ("consecutive", "limit", "all"):
        raise InvalidArgument(f"unknown pairing {pairs!r}")
    eps_list = list(cfg.sweep.eps_list if eps_list is None else eps_list)
    if len(eps_list) < 2:
        raise InvalidArgument("eps sweep needs at least two values")
    if any(e < 0 for e in eps_list):
        raise InvalidArgument("eps values must be >= 0")
    setups = [prepare(cfg, seed, eps=e, dt=1.0) for e in eps_list]
    dt = shared_dt(cfg, setups)
    for s in setups:
        s.dt = dt
    cadence = _record_times(cfg)
    trajs = _map(lambda s: _trajectory_coefficients(s, cadence), setups, threads)
    N = setups[0].grid.N
    w = _compact_weights(setups[0].grid, N, 1)
    last = len(eps_list) - 1
    index = []
    if pairs in ("consecutive", "all"):
        index += [(i, i + 1) for i in range(last)]
    if pairs in ("limit", "all"):
        index += [(i, last) for i in range(last)]
    rows = []
    for i, j in index:
        du, ds = _sup_difference(trajs[i], trajs[j], w, N, N, N)
        rows.append(DifferenceRow(eps_list[i], eps_list[j], du, ds))
    return rows


def sweep_resolution(cfg: RunConfig, N_list: Optional[Sequence[int]] = None,
                     seed: Optional[int] = None, threads: Optional[int] = None) -> list:
    """Sup-in-time H1 differences between consecutive cutoffs on their common modes.

    The initial data must be band-limited to ``min(N_list)``; the presets
    used here are, and the check is enforced.
    """
    N_list = [int(n) for n in (cfg.sweep.N_list if N_list is None else N_list)]
    if len(N_list) < 2:
        raise InvalidArgument("resolution sweep needs at least two cutoffs")
    setups = [prepare(cfg, seed, N=n, dt=1.0) for n in N_list]
    Nmin = min(N_list)
    for s in setups:
        for f in (s.state0.u, s.state0.sigma):
            if s.grid.spectral_content_above(f, Nmin) > 1e-12 * max(1.0, float(np.max(np.abs(f)))):
                raise InvalidArgument(f"initial data is not band-limited to N={Nmin}")
    dt = shared_dt(cfg, setups)
    for s in setups:
        s.dt = dt
    cadence = _record_times(cfg)
    trajs = _map(lambda s: _trajectory_coefficients(s, cadence), setups, threads)
    rows = []
    for i in range(len(N_list) - 1):
        Na, Nb = N_list[i], N_list[i + 1]
        N = min(Na, Nb)
        w = _compact_weights(setups[i].grid, N, 1)
        du, ds = _sup_difference(trajs[i], trajs[i + 1], w, Na, Nb, N)
        rows.append(DifferenceRow(Na, Nb, du, ds))
    return rows


# twin runs ------------------------------------------------------------------

@dataclass(frozen=True)
class TwinResult:
    times: np.ndarray
    D: np.ndarray
    K: np.ndarray
    delta: float

    @property
    def envelope_slope(self) -> float:
        """Smallest ``s`` with ``D(t) <= D(0) exp(s t)`` at every recorded ``t > 0``."""
        if self.D[0] == 0:
            return 0.0
        t = self.times[1:] - self.times[0]
        return float(np.max(np.log(self.D[1:] / self.D[0]) / t)) if len(t) else 0.0

    @property
    def K_sup(self) -> float:
        return float(np.max(self.K))

    def gronwall_bound(self) -> np.ndarray:
        """``D(0) exp(int_0^t K)`` with the trapezoidal rule on the recorded times."""
        dt = np.diff(self.times)
        integral = np.concatenate([[0.0], np.cumsum(0.5 * dt * (self.K[1:] + self.K[:-1]))])
        return self.D[0] * np.exp(integral)

    def rows(self) -> list:
        return list(zip(self.times.tolist(), self.D.tolist(), self.K.tolist()))


def difference_functional(grid: SpectralGrid, du_c: np.ndarray, ds_c: np.ndarray,
                          E_mod: float, alpha: float) -> float:
    """``|du|^2 + |grad du|^2 + (|ds|^2 + (1 + alpha^2)|grad ds|^2 + alpha^2 |Lap ds|^2) / E``
    from compact coefficients."""
    N = grid.N
    mult = _compact_weights(grid, N, 0)
    kx, ky = grid.compact_wavenumbers()
    q = TWO_PI**2 * (kx**2 + ky**2)
    au = np.sum(np.abs(du_c) ** 2, axis=0)
    asg = np.sum(np.abs(ds_c) ** 2, axis=(0, 1))
    wu = 1.0 + q
    ws = (1.0 + (1.0 + alpha**2) * q + alpha**2 * q**2) / E_mod
    return float(np.sum((au * wu + asg * ws) * mult))


def _h2(grid: SpectralGrid, c: np.ndarray) -> float:
    lead = tuple(range(c.ndim - 2))
    return math.sqrt(float(np.sum(np.sum(np.abs(c) ** 2, axis=lead) * _compact_weights(grid, grid.N, 2))))


def perturbation_direction(grid: SpectralGrid, E_mod: float, alpha: float,
                           direction: str = "mode", seed: int = 0) -> State:
    """Smooth perturbation with unit difference functional.

    ``"mode"`` is a fixed single low mode; ``"random"`` draws seeded modes
    with ``|k|_inf <= 2``.  The stress part is symmetric.
    """
    x, y = grid.coords()
    if direction == "mode":
        u = np.stack([np.sin(TWO_PI * y), np.cos(TWO_PI * x)])
        s = np.zeros((2, 2) + grid.shape)
        s[0, 0] = np.cos(TWO_PI * (x + y))
        s[1, 1] = -np.cos(TWO_PI * (x + y))
        s[0, 1] = s[1, 0] = np.sin(TWO_PI * x)
    elif direction == "random":
        from .model import random_band_limited
        rng = np.random.default_rng(seed)
        u = random_band_limited(grid, (2,), min(2, grid.N), rng)
        s = random_band_limited(grid, (2, 2), min(2, grid.N), rng)
        s = 0.5 * (s + s.swapaxes(0, 1))
    else:
        raise InvalidArgument(f"unknown perturbation direction {direction!r}")
    norm = math.sqrt(difference_functional(grid, grid.forward_compact(u), grid.forward_compact(s),
                                           E_mod, alpha))
    return State(u / norm, s / norm, 0.0)


def twin_stability(cfg: RunConfig, delta: Optional[float] = None, seed: Optional[int] = None,
                   C: Optional[float] = None, threads: Optional[int] = None) -> TwinResult:
    """Evolve a state and its ``delta``-perturbed twin; record ``D(t)`` and the
    Gronwall coefficient ``K(t) = C (1 + |u1|_H2 + |u2|_H2 + |s1|_H2 + |s2|_H2)``.

    ``D(0) = delta^2`` because the perturbation has unit difference functional.
    """
    delta = cfg.sweep.delta if delta is None else float(delta)
    C = cfg.sweep.gronwall_C if C is None else float(C)
    if delta < 0:
        raise InvalidArgument(f"delta must be >= 0, got {delta}")
    base = prepare(cfg, seed)
    g, p = base.grid, base.params
    pert = perturbation_direction(g, p.E_mod, p.alpha, cfg.sweep.direction,
                                  cfg.init.seed if seed is None else seed)
    s0 = base.state0
    twin0 = State(s0.u + delta * pert.u, s0.sigma + delta * pert.sigma, s0.t)
    cadence = _record_times(cfg)

    def run(state):
        return _trajectory_coefficients(_with_state(base, state), cadence)

    a, b = _map(run, [s0, twin0], threads)
    times, D, K = [], [], []
    for (t, ua, sa), (_, ub, sb) in zip(a, b):
        times.append(t)
        D.append(difference_functional(g, ua - ub, sa - sb, p.E_mod, p.alpha))
        K.append(C * (1.0 + _h2(g, ua) + _h2(g, ub) + _h2(g, sa) + _h2(g, sb)))
    return TwinResult(np.asarray(times), np.asarray(D), np.asarray(K), delta)


def _with_state(setup, state):
    from dataclasses import replace
    return replace(setup, state0=state)
