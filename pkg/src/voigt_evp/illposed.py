"""One-dimensional EVP laboratory: Hadamard-type instability of the
unregularised stress relaxation and its cure by the Voigt term.

The 1D system on the unit circle is::

    u_t = sigma_x
    sigma_t = (I - alpha^2 d_xx)^{-1} [u_x - (5 D / 2P) sigma - D / 2],
    D = sqrt(u_x^2 + eps^2)

(``alpha = 0`` is the unregularised model).  Linearising about a constant
background ``(ubar_x, sigbar)`` gives, per Fourier mode ``k``,
``lambda^2 + a m lambda + c m (2 pi k)^2 = 0`` with damping ``a``, the
ellipticity coefficient ``c`` and the Voigt multiplier
``m = 1 / (1 + 4 pi^2 alpha^2 k^2)``.  ``c < 0`` gives growth rates
proportional to ``k`` when ``alpha = 0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import BlowUpError, InvalidArgument
from .integrate import rk4_step
from .spectral import TWO_PI, SpectralGrid, make_grid

__all__ = [
    "State1D",
    "Background1D",
    "InstabilityResult",
    "rhs_1d",
    "linearized_rhs_1d",
    "ellipticity_coefficient",
    "damping_coefficient",
    "voigt_multiplier",
    "dispersion_growth_rate",
    "run_instability_experiment",
]


@dataclass(frozen=True, eq=False)
class State1D:
    u: np.ndarray
    sigma: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class Background1D:
    """Frozen constant background ``(d_x ubar, sigbar)``."""

    ubar_x: float
    sigbar: float
    P: float = 1.0
    eps: float = 1e-3

    def __post_init__(self):
        if not self.P > 0:
            raise InvalidArgument(f"P must be > 0, got {self.P}")
        if self.eps < 0:
            raise InvalidArgument(f"eps must be >= 0, got {self.eps}")


def _smoothing(grid: SpectralGrid, alpha: float) -> np.ndarray:
    if alpha < 0:
        raise InvalidArgument(f"alpha must be >= 0, got {alpha}")
    return grid.mask / (1.0 + (TWO_PI * alpha) ** 2 * grid.ksq)


def rhs_1d(grid: SpectralGrid, state: State1D, P: float, eps: float, alpha: float = 0.0):
    """Nonlinear 1D tendencies ``(du, dsigma)``."""
    if not P > 0:
        raise InvalidArgument(f"P must be > 0, got {P}")
    ik = 1j * TWO_PI * grid.k[0] * grid.mask
    cu = grid.forward(state.u)
    cs = grid.forward(state.sigma)
    ux = grid.backward(cu * ik)
    D = np.sqrt(ux * ux + eps * eps)
    forcing = ux - (5.0 * D / (2.0 * P)) * state.sigma - 0.5 * D
    dsigma = grid.backward(grid.forward(forcing) * _smoothing(grid, alpha))
    return grid.backward(cs * ik), dsigma


def ellipticity_coefficient(bg: Background1D) -> float:
    """Coefficient of ``u_xx`` in the linearised wave equation; < 0 is elliptic."""
    r = math.hypot(bg.ubar_x, bg.eps)
    if r == 0.0:
        raise InvalidArgument("ellipticity coefficient undefined for eps = 0 and ubar_x = 0")
    return 1.0 - (5.0 / (2.0 * bg.P)) * bg.sigbar * bg.ubar_x / r - 0.5 * bg.ubar_x / r


def damping_coefficient(bg: Background1D) -> float:
    return 5.0 / (2.0 * bg.P) * math.hypot(bg.ubar_x, bg.eps)


def voigt_multiplier(k, alpha: float):
    return 1.0 / (1.0 + (TWO_PI * alpha) ** 2 * np.square(k))


def linearized_rhs_1d(grid: SpectralGrid, pert: State1D, bg: Background1D, alpha: float = 0.0):
    """Tendencies of the perturbation about a constant background."""
    a = damping_coefficient(bg)
    c = ellipticity_coefficient(bg)
    ik = 1j * TWO_PI * grid.k[0] * grid.mask
    cu = grid.forward(pert.u)
    cs = grid.forward(pert.sigma)
    du = grid.backward(cs * ik)
    dsigma = grid.backward((-a * cs + c * ik * cu) * _smoothing(grid, alpha))
    return du, dsigma


def dispersion_growth_rate(bg: Background1D, k: int, alpha: float = 0.0) -> tuple:
    """Both roots ``(lambda_+, lambda_-)`` of the modal equation, larger real part first."""
    if k < 0:
        raise InvalidArgument(f"k must be >= 0, got {k}")
    m = float(voigt_multiplier(k, alpha))
    b = damping_coefficient(bg) * m
    q = ellipticity_coefficient(bg) * m * (TWO_PI * k) ** 2
    root = cmath.sqrt(b * b - 4.0 * q)
    lam1 = (-b + root) / 2.0
    lam2 = (-b - root) / 2.0
    return (lam1, lam2) if lam1.real >= lam2.real else (lam2, lam1)


@dataclass(frozen=True)
class InstabilityResult:
    k: int
    predicted_rate: float
    measured_rate: float
    relative_error: float
    clipped: bool = False

    def as_row(self) -> tuple:
        return (self.k, self.predicted_rate, self.measured_rate, self.relative_error)


def _mode_amplitude(grid, state, k, weight):
    cu = grid.forward(state.u)[k]
    cs = grid.forward(state.sigma)[k]
    return math.sqrt(abs(cu) ** 2 + weight * abs(cs) ** 2)


def measure_growth_rate(bg: Background1D, k: int, T: float, dt: float, seed_amp: float = 1e-6,
                        alpha: float = 0.0, N: Optional[int] = None,
                        fit_fraction: float = 0.5) -> InstabilityResult:
    """Evolve a single-mode seed with the linearised system and fit the rate.

    The grid cutoff defaults to ``k`` itself: any roundoff leaking into
    higher modes would otherwise outgrow the seeded mode when ``c < 0``.
    The state is rescaled whenever the amplitude passes 1e100 and the log
    amplitude accumulated, so the fit never overflows; if a non-finite
    value appears anyway the fit uses the samples before it and the
    result is flagged ``clipped``.
    """
    if not seed_amp >= 0:  # also rejects nan
        raise InvalidArgument(f"seed_amp must be >= 0, got {seed_amp}")
    if not (T > 0 and dt > 0):
        raise InvalidArgument("T and dt must be > 0")
    if not 0 < fit_fraction <= 1:
        raise InvalidArgument(f"fit_fraction must lie in (0, 1], got {fit_fraction}")
    grid = make_grid(max(k, 1) if N is None else N, 2, dim=1)
    if k > grid.N:
        raise InvalidArgument(f"mode {k} is above the grid cutoff {grid.N}")
    predicted = dispersion_growth_rate(bg, k, alpha)[0].real
    if seed_amp == 0:
        # nothing to measure: the state stays zero
        return InstabilityResult(k, predicted, 0.0, float("nan"), False)

    c = ellipticity_coefficient(bg)
    m = float(voigt_multiplier(k, alpha))
    # |u_k|^2 + |sigma_k|^2 / (m |c|) is conserved by the undamped modal system
    weight = 1.0 / (m * abs(c)) if c != 0 else 1.0
    (x,) = grid.coords()
    state = State1D(seed_amp * np.cos(TWO_PI * k * x), np.zeros_like(x), 0.0)

    def rhs(s):
        return linearized_rhs_1d(grid, s, bg, alpha)

    nsteps = int(round(T / dt))
    times = [0.0]
    logs = [math.log(_mode_amplitude(grid, state, k, weight))]
    log_shift = 0.0
    clipped = False
    for n in range(nsteps):
        try:
            new = rk4_step(state, dt, rhs)
        except BlowUpError:
            clipped = True
            break
        amp = _mode_amplitude(grid, new, k, weight)
        if not math.isfinite(amp) or amp == 0.0:
            clipped = True
            break
        state = new
        if amp > 1e100:
            state = State1D(state.u / amp, state.sigma / amp, state.t)
            log_shift += math.log(amp)
            amp = 1.0
        times.append((n + 1) * dt)
        logs.append(log_shift + math.log(amp))

    times = np.asarray(times)
    logs = np.asarray(logs)
    start = times[-1] * (1.0 - fit_fraction)
    sel = times >= start - 1e-12 * max(T, 1.0)
    if sel.sum() < 2:
        sel = slice(None)
    slope = float(np.polyfit(times[sel], logs[sel], 1)[0])
    rel = abs(slope - predicted) / abs(predicted) if predicted != 0 else abs(slope)
    return InstabilityResult(k, predicted, slope, rel, clipped)


def run_instability_experiment(bg: Background1D, k_list: Iterable[int], T: float, dt: float,
                               seed_amp: float = 1e-6, alpha: float = 0.0,
                               N: Optional[int] = None, fit_fraction: float = 0.5) -> list:
    """Measured versus predicted growth rate for each mode in ``k_list``."""
    return [measure_growth_rate(bg, int(k), T, dt, seed_amp, alpha, N, fit_fraction)
            for k in k_list]
