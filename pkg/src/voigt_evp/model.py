"""Continuous-model content of the Voigt-EVP sea-ice system.

Momentum balance and Voigt-regularised stress relaxation on the unit torus::

    du/dt = div(sigma) + T_a + T_w + Omega u_perp - g grad(H0)
    (1/E) d/dt (I - alpha^2 Lap) sigma + R(sigma, D) = D(u)

with ``R(sigma, D) = (e^2 D / P) dev(sigma) + (D / 2P) tr(sigma) I + (D/2) I``.
Mass per unit area is fixed to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import InvalidArgument, NumericError
from .spectral import (
    TWO_PI,
    SpectralGrid,
    divergence_sym_tensor,
    galerkin_project,
    gradient,
    voigt_invert,
)

STRAIN_VARIANTS = {
    "simplified": kernels.SIMPLIFIED,
    "original": kernels.ORIGINAL,
    "smoothed_max": kernels.SMOOTHED_MAX,
}
FORCING_MODES = ("zero", "paper", "periodic")


@dataclass(frozen=True)
class PhysicalParams:
    """Scalar constants of the model.  Angles are in radians."""

    E_mod: float = 0.25
    alpha: float = 0.1
    P: float = 27.5e3
    e_bar: float = 2.0
    eps: float = 1e-9
    gamma: float = 0.0
    Omega: float = 1.46e-4
    g: float = 9.81
    theta: float = math.radians(25.0)
    phi: float = math.radians(25.0)
    c_a: float = 1.2e-3
    c_w: float = 5.5e-3
    rho_a: float = 1.3
    rho_w: float = 1026.0
    m: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise InvalidArgument(f"{f.name} must be a finite real number, got {v!r}")
        if not self.P > 0:
            raise InvalidArgument(f"P must be > 0, got {self.P}")
        if not self.E_mod > 0:
            raise InvalidArgument(f"E_mod must be > 0, got {self.E_mod}")
        if not self.e_bar > 1:
            raise InvalidArgument(f"e_bar must be > 1, got {self.e_bar}")
        if self.alpha < 0:
            raise InvalidArgument(f"alpha must be >= 0, got {self.alpha}")
        if self.eps < 0 or self.gamma < 0:
            raise InvalidArgument("eps and gamma must be >= 0")
        if not 0.0 <= self.theta <= math.pi / 4:
            raise InvalidArgument(
                f"theta must lie in [0, pi/4] so ocean drag stays dissipative, got {self.theta}")
        if self.c_a < 0 or self.c_w < 0:
            raise InvalidArgument("drag coefficients must be >= 0")
        if not (self.rho_a > 0 and self.rho_w > 0):
            raise InvalidArgument("densities must be > 0")
        if self.m != 1.0:
            raise InvalidArgument(f"mass per unit area is fixed to 1, got {self.m}")

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


def table_params(**overrides) -> PhysicalParams:
    """Typical dimensional values (ice strength taken as P0 with h = A = 1)."""
    return PhysicalParams(**overrides)


def nondimensional_params(**overrides) -> PhysicalParams:
    """All constants O(1); used by the property tests and experiments."""
    base = dict(E_mod=1.0, alpha=0.1, P=1.0, e_bar=2.0, eps=0.1, gamma=0.0,
                Omega=1.0, g=1.0, theta=math.radians(25.0), phi=math.radians(25.0),
                c_a=0.1, c_w=0.1, rho_a=1.0, rho_w=1.0)
    base.update(overrides)
    return PhysicalParams(**base)


@dataclass(frozen=True)
class ForcingSpec:
    """Wind, ocean current and sea-surface height.

    ``mode`` picks the built-in fields: ``"paper"`` uses the literal
    gyre/wind formulas (not periodic on the torus), ``"periodic"`` replaces
    every non-periodic factor by a ``sin(2 pi .)`` analogue with the same
    amplitude, ``"zero"`` switches everything off.  Callables ``wind(x, y, t)``,
    ``ocean(x, y)`` returning 2-tuples and ``topography(x, y)`` override the
    mode for their field.
    """

    mode: str = "periodic"
    period: float = 1.0
    wind: Optional[Callable] = None
    ocean: Optional[Callable] = None
    topography: Optional[Callable] = None

    def __post_init__(self):
        if self.mode not in FORCING_MODES:
            raise InvalidArgument(f"unknown forcing mode {self.mode!r}; expected one of {FORCING_MODES}")
        if not self.period > 0:
            raise InvalidArgument(f"forcing period must be > 0, got {self.period}")


@dataclass(frozen=True, eq=False)
class State:
    """Velocity ``u`` (2, M, M), full stress ``sigma`` (2, 2, M, M), time ``t``."""

    u: np.ndarray
    sigma: np.ndarray
    t: float = 0.0

    def advanced(self, du, dsigma, dt) -> "State":
        return State(self.u + dt * du, self.sigma + dt * dsigma, self.t + dt)


# kinematics -----------------------------------------------------------------

def sym_gradient(grid: SpectralGrid, u: np.ndarray) -> np.ndarray:
    """``D(u) = (grad u + grad u^T) / 2`` as a (2, 2, M, M) tensor."""
    G = gradient(grid, u)
    return 0.5 * (G + G.swapaxes(0, 1))


def frobenius_sq(T: np.ndarray) -> np.ndarray:
    return np.sum(T * T, axis=(0, 1))


def trace(T: np.ndarray) -> np.ndarray:
    return T[0, 0] + T[1, 1]


def deviator(T: np.ndarray) -> np.ndarray:
    out = T.copy()
    half_tr = 0.5 * trace(T)
    out[0, 0] -= half_tr
    out[1, 1] -= half_tr
    return out


def strain_rate_simplified(D: np.ndarray, eps: float) -> np.ndarray:
    """``sqrt(|D|^2 + eps^2)`` pointwise."""
    return np.sqrt(frobenius_sq(D) + eps * eps)


def strain_rate_original(D: np.ndarray, e_bar: float, eps: float) -> np.ndarray:
    """Elliptic-yield-curve strain rate with an ``eps`` floor under the root."""
    if not e_bar > 1:
        raise InvalidArgument(f"e_bar must be > 1, got {e_bar}")
    tr = trace(D)
    return np.sqrt((2.0 / e_bar**2) * frobenius_sq(deviator(D)) + tr * tr + eps * eps)


def strain_rate_smoothed_max(Dbar: np.ndarray, eps: float, gamma: float) -> np.ndarray:
    """Smooth version of ``max(Dbar, eps)``; exact max at ``gamma = 0``."""
    if gamma == 0:
        return np.maximum(Dbar, eps)
    return 0.5 * (Dbar + eps + gamma) + 0.5 * np.sqrt((Dbar - eps) ** 2 + gamma**2)


def strain_rate(D: np.ndarray, params: PhysicalParams, variant: str = "simplified") -> np.ndarray:
    if variant == "simplified":
        return strain_rate_simplified(D, params.eps)
    if variant == "original":
        return strain_rate_original(D, params.e_bar, params.eps)
    if variant == "smoothed_max":
        return strain_rate_smoothed_max(strain_rate_original(D, params.e_bar, 0.0),
                                        params.eps, params.gamma)
    raise InvalidArgument(f"unknown strain variant {variant!r}; expected one of {tuple(STRAIN_VARIANTS)}")


def rheology_relaxation(sigma: np.ndarray, Dfield: np.ndarray, P: float, e_bar: float = 2.0) -> np.ndarray:
    """Relaxation tensor ``R(sigma, D)``; vanishes at ``sigma = -P/2 I``.

    The trace and constant terms are combined as ``(D / 2P)(tr sigma + P) I``
    so the steady stress cancels exactly in floating point.
    """
    if not P > 0:
        raise InvalidArgument(f"P must be > 0, got {P}")
    out = (e_bar**2 / P) * Dfield * deviator(sigma)
    iso = Dfield / (2.0 * P) * (trace(sigma) + P)
    out[0, 0] += iso
    out[1, 1] += iso
    return out


# drag -----------------------------------------------------------------------

def perp(u: np.ndarray) -> np.ndarray:
    """``u_perp = (-u_2, u_1)``."""
    return np.stack([-u[1], u[0]])


def _turned_drag(V: np.ndarray, coef: float, angle: float) -> np.ndarray:
    speed = np.sqrt(V[0] ** 2 + V[1] ** 2)
    return coef * speed * (V * math.cos(angle) + perp(V) * math.sin(angle))


def wind_stress(Ua: np.ndarray, params: PhysicalParams) -> np.ndarray:
    return _turned_drag(Ua, params.c_a * params.rho_a, params.phi)


def ocean_stress(Uw: np.ndarray, u: np.ndarray, params: PhysicalParams) -> np.ndarray:
    return _turned_drag(Uw - u, params.c_w * params.rho_w, params.theta)


# forcing --------------------------------------------------------------------

def gyre_ocean(x, y):
    return 0.1 * (2.0 * y - 1.0), -0.1 * (2.0 * x - 1.0)


def gyre_wind(x, y, t, period):
    a = math.sin(TWO_PI * t / period) - 3.0
    return (5.0 + a * np.sin(TWO_PI * x) * np.sin(np.pi * y),
            5.0 + a * np.sin(TWO_PI * y) * np.sin(np.pi * x))


def periodic_ocean(x, y):
    return 0.1 * np.sin(TWO_PI * y), -0.1 * np.sin(TWO_PI * x)


def periodic_wind(x, y, t, period):
    a = math.sin(TWO_PI * t / period) - 3.0
    s = np.sin(TWO_PI * x) * np.sin(TWO_PI * y)
    return 5.0 + a * s, 5.0 + a * s


def _as_vector(pair, shape) -> np.ndarray:
    return np.stack([np.broadcast_to(np.asarray(c, dtype=float), shape) for c in pair])


def eval_forcing(spec: ForcingSpec, grid: SpectralGrid, t: float):
    """``(U_a, U_w, P_N grad H0)`` on the collocation grid at time ``t``."""
    if t < 0:
        raise InvalidArgument(f"t must be >= 0, got {t}")
    x, y = grid.coords()
    shape = grid.shape
    if spec.wind is not None:
        Ua = _as_vector(spec.wind(x, y, t), shape)
    elif spec.mode == "paper":
        Ua = _as_vector(gyre_wind(x, y, t, spec.period), shape)
    elif spec.mode == "periodic":
        Ua = _as_vector(periodic_wind(x, y, t, spec.period), shape)
    else:
        Ua = np.zeros((2,) + shape)
    if spec.ocean is not None:
        Uw = _as_vector(spec.ocean(x, y), shape)
    elif spec.mode == "paper":
        Uw = _as_vector(gyre_ocean(x, y), shape)
    elif spec.mode == "periodic":
        Uw = _as_vector(periodic_ocean(x, y), shape)
    else:
        Uw = np.zeros((2,) + shape)
    return Ua, Uw, topography_gradient(spec, grid)


def topography_gradient(spec: ForcingSpec, grid: SpectralGrid) -> np.ndarray:
    if spec.topography is None:
        return np.zeros((2,) + grid.shape)
    x, y = grid.coords()
    H0 = np.broadcast_to(np.asarray(spec.topography(x, y), dtype=float), grid.shape)
    c = grid.forward(H0) * grid.mask
    kx, ky = grid.k
    return grid.backward(np.stack([c * (1j * TWO_PI * kx), c * (1j * TWO_PI * ky)]))


# right-hand sides (reference route) -----------------------------------------

def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise NumericError(f"non-finite values in {what}")


def momentum_rhs(state: State, forcing: ForcingSpec, params: PhysicalParams,
                 grid: SpectralGrid) -> np.ndarray:
    """``div sigma + P_N T_a + P_N T_w + Omega u_perp - g P_N grad H0``."""
    Ua, Uw, gradH0 = eval_forcing(forcing, grid, state.t)
    drag = wind_stress(Ua, params) + ocean_stress(Uw, state.u, params)
    _check_finite(drag, "drag")
    out = (divergence_sym_tensor(grid, state.sigma) + galerkin_project(grid, drag)
           + params.Omega * perp(state.u) - params.g * gradH0)
    _check_finite(out, "momentum_rhs")
    return out


def stress_rhs(state: State, params: PhysicalParams, grid: SpectralGrid,
               strain_variant: str = "simplified") -> np.ndarray:
    """``E (I - alpha^2 Lap)^{-1} Q_N [D(u) - R(sigma, D)]``."""
    if not params.alpha > 0:
        raise InvalidArgument(f"alpha must be > 0 for the Voigt model, got {params.alpha}")
    D = sym_gradient(grid, state.u)
    Dfield = strain_rate(D, params, strain_variant)
    R = rheology_relaxation(state.sigma, Dfield, params.P, params.e_bar)
    _check_finite(R, "relaxation tensor")
    out = params.E_mod * voigt_invert(grid, D - R, params.alpha)
    _check_finite(out, "stress_rhs")
    return out


# fused right-hand side ------------------------------------------------------

@dataclass(eq=False)
class VoigtEVP:
    """The Galerkin ODE system as a callable ``state -> (du/dt, dsigma/dt)``.

    Shares transforms between the two equations and evaluates the pointwise
    nonlinearities through :mod:`voigt_evp.kernels`.  Agrees with
    :func:`momentum_rhs` / :func:`stress_rhs` to rounding.
    """

    grid: SpectralGrid
    params: PhysicalParams
    forcing: ForcingSpec = field(default_factory=lambda: ForcingSpec(mode="zero"))
    strain_variant: str = "simplified"
    backend: Optional[str] = None

    def __post_init__(self):
        if self.strain_variant not in STRAIN_VARIANTS:
            raise InvalidArgument(f"unknown strain variant {self.strain_variant!r}")
        if not self.params.alpha > 0:
            raise InvalidArgument(f"alpha must be > 0 for the Voigt model, got {self.params.alpha}")
        if self.grid.dim != 2:
            raise InvalidArgument("VoigtEVP needs a 2D grid")
        g = self.grid
        p = self.params
        self._kern = kernels.get_backend(self.backend)
        self._code = STRAIN_VARIANTS[self.strain_variant]
        kx, ky = g.compact_wavenumbers()
        self._ik = (1j * TWO_PI * kx, 1j * TWO_PI * ky)
        self._stress_mult = p.E_mod / (1.0 + (TWO_PI * p.alpha) ** 2 * (kx**2 + ky**2))
        self._wind_coef = p.c_a * p.rho_a
        self._ocean_coef = p.c_w * p.rho_w
        self._gradH0 = topography_gradient(self.forcing, g)
        self._has_topo = self.forcing.topography is not None and p.g != 0.0
        self._wind_spec = replace(self.forcing, topography=None)
        self._forced = (self.forcing.mode != "zero" or self.forcing.wind is not None
                        or self.forcing.ocean is not None)
        self._Uw = eval_forcing(self._wind_spec, g, 0.0)[1]
        # the wind stress depends on t only; RK4 asks for each stage time twice
        self._wind_cache = {}

    def _wind_stress(self, t: float) -> np.ndarray:
        tau = self._wind_cache.get(t)
        if tau is None:
            Ua = eval_forcing(self._wind_spec, self.grid, t)[0]
            tau = self._kern.drag(Ua, self._wind_coef, self.params.phi)
            if len(self._wind_cache) >= 4:
                self._wind_cache.clear()
            self._wind_cache[t] = tau
        return tau

    def __call__(self, state: State):
        g, p = self.grid, self.params
        ikx, iky = self._ik
        # compact spectral layout throughout: every transform here is of a
        # band-limited field or is truncated immediately
        cu = g.forward_compact(state.u)
        cs = g.forward_compact(state.sigma)
        cG = np.stack([cu * ikx, cu * iky], axis=1)
        G = g.backward_compact(cG)
        Dfield, R = self._kern.constitutive(G, state.sigma, self._code, p.eps, p.gamma, p.e_bar, p.P)
        cD = 0.5 * (cG + cG.swapaxes(0, 1))
        dsigma = g.backward_compact((cD - g.forward_compact(R)) * self._stress_mult)

        cdu = cs[:, 0] * ikx + cs[:, 1] * iky
        # ice-ocean drag acts even without a current; wind only when forced
        wind = self._forced and self._wind_coef != 0.0
        if wind or self._ocean_coef != 0.0:
            drag = np.zeros_like(state.u)
            if wind:
                drag += self._wind_stress(state.t)
            if self._ocean_coef != 0.0:
                drag += self._kern.drag(self._Uw - state.u, self._ocean_coef, p.theta)
            cdu = cdu + g.forward_compact(drag)
        du = g.backward_compact(cdu) + p.Omega * perp(state.u)
        if self._has_topo:
            du -= p.g * self._gradH0
        if not (np.all(np.isfinite(du)) and np.all(np.isfinite(dsigma))):
            raise NumericError(f"non-finite tendency at t={state.t}")
        return du, dsigma


# initial data ---------------------------------------------------------------

def rest_state(grid: SpectralGrid, params: PhysicalParams, t: float = 0.0) -> State:
    """``u = 0``, ``sigma = -P/2 I``: the unforced steady state."""
    sigma = np.zeros((2, 2) + grid.shape)
    sigma[0, 0] = sigma[1, 1] = -0.5 * params.P
    return State(np.zeros((2,) + grid.shape), sigma, t)


def random_band_limited(grid: SpectralGrid, lead: tuple, kmax: int, rng: np.random.Generator,
                        decay: float = 1.0) -> np.ndarray:
    """Random real field with modes ``|k|_inf <= kmax`` and ``|k|^-decay`` amplitude."""
    shape = tuple(lead) + grid.shape
    c = np.zeros(tuple(lead) + np.broadcast_shapes(*(kk.shape for kk in grid.k)), dtype=complex)
    band = grid.band_mask(kmax)
    amp = band / (1.0 + grid.ksq) ** (decay / 2.0)
    c = (rng.standard_normal(c.shape) + 1j * rng.standard_normal(c.shape)) * amp
    f = grid.backward(c)  # irfftn keeps only the Hermitian part
    return f.reshape(shape)


def smooth_state(grid: SpectralGrid, params: PhysicalParams, amp: float = 0.1,
                 symmetric: bool = True) -> State:
    """Deterministic low-mode initial data used by presets and experiments."""
    if grid.N < 2:
        raise InvalidArgument("smooth_state needs N >= 2")
    x, y = grid.coords()
    tp = TWO_PI
    u = amp * np.stack([
        np.sin(tp * y) + 0.5 * np.cos(tp * (x + 2 * y)),
        np.sin(tp * x) - 0.3 * np.cos(tp * (2 * x - y)),
    ])
    sigma = rest_state(grid, params).sigma
    s = 0.25 * amp * params.P
    sigma[0, 0] += s * np.cos(tp * x) * np.sin(tp * y)
    sigma[1, 1] += s * np.sin(tp * (x + y))
    off = s * np.cos(tp * (x - y))
    sigma[0, 1] += off
    sigma[1, 0] += off if symmetric else -off
    return State(u, sigma, 0.0)


def random_state(grid: SpectralGrid, params: PhysicalParams, rng: np.random.Generator,
                 kmax: int | None = None, amp: float = 0.1, symmetric: bool = True) -> State:
    kmax = min(grid.N, 4) if kmax is None else kmax
    u = amp * random_band_limited(grid, (2,), kmax, rng)
    sigma = amp * params.P * random_band_limited(grid, (2, 2), kmax, rng)
    if symmetric:
        sigma = 0.5 * (sigma + sigma.swapaxes(0, 1))
    sigma[0, 0] -= 0.5 * params.P
    sigma[1, 1] -= 0.5 * params.P
    return State(u, sigma, 0.0)
