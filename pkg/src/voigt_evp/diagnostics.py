"""Energies, dissipation, symmetry defect, Sobolev norms and residuals.

Integrals are torus means on the collocation grid (exact for band-limited
integrands of degree below ``M``); derivative norms go through Parseval.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import InvalidArgument
from .model import (
    PhysicalParams,
    State,
    deviator,
    frobenius_sq,
    rheology_relaxation,
    strain_rate,
    sym_gradient,
    trace,
)
from .spectral import TWO_PI, SpectralGrid, _parseval_weighted, divergence_sym_tensor

CSV_COLUMNS = ("t", "E_l2", "dissipation", "sym_defect", "cancel_residual",
               "L2_u", "H1_u", "H2_u", "L2_sigma", "H1_sigma", "H2_sigma", "H3_sigma",
               "Dmin", "Dmax")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    E_l2: float
    dissipation: float
    sym_defect: float
    cancel_residual: float
    L2_u: float
    H1_u: float
    H2_u: float
    L2_sigma: float
    H1_sigma: float
    H2_sigma: float
    H3_sigma: float
    Dmin: float
    Dmax: float

    def as_row(self) -> tuple:
        return astuple(self)


assert tuple(f.name for f in fields(DiagnosticsRecord)) == CSV_COLUMNS


def tau(sigma: np.ndarray, P: float) -> np.ndarray:
    """Shifted stress ``sigma + (P/2) I``."""
    out = sigma.copy()
    out[0, 0] += 0.5 * P
    out[1, 1] += 0.5 * P
    return out


def l2_sq(f: np.ndarray) -> float:
    """Squared L2 norm over the unit torus, summed over components."""
    return float(np.sum(np.mean(f * f, axis=(-2, -1))))


def grad_sq(grid: SpectralGrid, f: np.ndarray) -> float:
    """``||grad f||^2`` summed over components."""
    return _parseval_weighted(grid, grid.forward(f), TWO_PI**2 * grid.ksq)


def lap_sq(grid: SpectralGrid, f: np.ndarray) -> float:
    """``||Laplacian f||^2`` summed over components."""
    return _parseval_weighted(grid, grid.forward(f), (TWO_PI**2 * grid.ksq) ** 2)


def sobolev_norm(grid: SpectralGrid, f: np.ndarray, s: int) -> float:
    """``||f||_{H^s}`` with weight ``(1 + 4 pi^2 |k|^2)^s``, components summed."""
    if s not in (0, 1, 2, 3):
        raise InvalidArgument(f"Sobolev index must be 0, 1, 2 or 3, got {s!r}")
    w = (1.0 + TWO_PI**2 * grid.ksq) ** s
    return float(np.sqrt(_parseval_weighted(grid, grid.forward(f), w)))


def l2_energy(grid: SpectralGrid, state: State, params: PhysicalParams) -> float:
    """``(||u||^2 + ||tau||^2 / E + alpha^2 ||grad tau||^2 / E) / 2``."""
    t = tau(state.sigma, params.P)
    return 0.5 * (l2_sq(state.u) + (l2_sq(t) + params.alpha**2 * grad_sq(grid, t)) / params.E_mod)


def dissipation_rate(grid: SpectralGrid, state: State, params: PhysicalParams,
                     strain_variant: str = "simplified") -> float:
    """Sign-definite relaxation integral of the energy balance."""
    if not params.P > 0:
        raise InvalidArgument(f"P must be > 0, got {params.P}")
    Dfield = strain_rate(sym_gradient(grid, state.u), params, strain_variant)
    t = tau(state.sigma, params.P)
    integrand = Dfield * ((params.e_bar**2 / params.P) * frobenius_sq(deviator(t))
                          + trace(t) ** 2 / (2.0 * params.P))
    return float(np.mean(integrand))


def antisymmetric_part(sigma: np.ndarray) -> np.ndarray:
    return 0.5 * (sigma - sigma.swapaxes(0, 1))


def symmetry_defect(sigma: np.ndarray) -> float:
    """``||W(sigma)||_{L2}`` with ``W = (sigma - sigma^T) / 2``."""
    return float(np.sqrt(l2_sq(antisymmetric_part(sigma))))


def antisymmetric_energy(grid: SpectralGrid, sigma: np.ndarray, alpha: float) -> float:
    """``||W||^2 + alpha^2 ||grad W||^2``; non-increasing along trajectories."""
    W = antisymmetric_part(sigma)
    return l2_sq(W) + alpha**2 * grad_sq(grid, W)


def cancellation_residual(grid: SpectralGrid, u: np.ndarray, sigma: np.ndarray,
                          params: PhysicalParams) -> float:
    """``int u . div(sigma) + tau : D(u)``, zero for symmetric sigma."""
    div = divergence_sym_tensor(grid, sigma)
    D = sym_gradient(grid, u)
    integrand = np.sum(u * div, axis=0) + np.sum(tau(sigma, params.P) * D, axis=(0, 1))
    return float(np.mean(integrand))


def cancellation_scale(grid: SpectralGrid, u: np.ndarray, sigma: np.ndarray,
                       params: PhysicalParams) -> float:
    """Size of the two integrals whose sum cancels: ``||u||_{H1} ||tau||_{H1}``."""
    return sobolev_norm(grid, u, 1) * sobolev_norm(grid, tau(sigma, params.P), 1)


def hibler_residual(grid: SpectralGrid, u: np.ndarray, sigma: np.ndarray,
                    params: PhysicalParams, strain_variant: str = "original") -> float:
    """L2 norm of ``R(sigma, Dbar) - D(u)``; zero at steady states."""
    D = sym_gradient(grid, u)
    Dfield = strain_rate(D, params, strain_variant)
    resid = rheology_relaxation(sigma, Dfield, params.P, params.e_bar) - D
    return float(np.sqrt(l2_sq(resid)))


def record(grid: SpectralGrid, state: State, params: PhysicalParams,
           strain_variant: str = "simplified") -> DiagnosticsRecord:
    Dfield = strain_rate(sym_gradient(grid, state.u), params, strain_variant)
    u, s = state.u, state.sigma
    return DiagnosticsRecord(
        t=float(state.t),
        E_l2=l2_energy(grid, state, params),
        dissipation=dissipation_rate(grid, state, params, strain_variant),
        sym_defect=symmetry_defect(s),
        cancel_residual=cancellation_residual(grid, u, s, params),
        L2_u=sobolev_norm(grid, u, 0),
        H1_u=sobolev_norm(grid, u, 1),
        H2_u=sobolev_norm(grid, u, 2),
        L2_sigma=sobolev_norm(grid, s, 0),
        H1_sigma=sobolev_norm(grid, s, 1),
        H2_sigma=sobolev_norm(grid, s, 2),
        H3_sigma=sobolev_norm(grid, s, 3),
        Dmin=float(np.min(Dfield)),
        Dmax=float(np.max(Dfield)),
    )
