"""Fourier calculus on the unit torus.

Fields are plain numpy arrays of collocation values on an ``M``-point
(per axis) padded grid; the trailing ``dim`` axes are spatial and any
leading axes are components.  Scalars are ``(M, M)``, vectors ``(2, M, M)``
and stress tensors ``(2, 2, M, M)`` with all four entries kept.

Spectral coefficients use the real-to-complex layout of ``scipy.fft.rfftn``
normalised so that ``f(x) = sum_k fhat_k exp(2 pi i k.x)``.  A field is
band-limited when ``fhat_k = 0`` for ``|k|_inf > N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import InvalidArgument, NumericError

__all__ = [
    "SpectralGrid",
    "make_grid",
    "partial_derivative",
    "gradient",
    "divergence_sym_tensor",
    "galerkin_project",
    "voigt_invert",
    "voigt_forward",
    "dealiased_product",
    "mean_integral",
]

TWO_PI = 2.0 * np.pi


def _axis_index(axis) -> int:
    if axis in ("x", 0):
        return 0
    if axis in ("y", 1):
        return 1
    raise InvalidArgument(f"unknown axis {axis!r}; expected 'x' or 'y'")


def _require_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise NumericError(f"non-finite values in {what}")


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Padded collocation grid with Galerkin cutoff ``N``.

    Built by :func:`make_grid`; the wavenumber arrays are broadcastable
    against the ``rfftn`` coefficient layout of the trailing spatial axes.
    """

    N: int
    M: int
    pad_factor: Fraction
    dim: int = 2
    domain_length: float = 1.0
    k: tuple = field(repr=False, default=())
    mask: np.ndarray = field(repr=False, default=None)
    ksq: np.ndarray = field(repr=False, default=None)

    @property
    def shape(self) -> tuple:
        return (self.M,) * self.dim

    @property
    def axes(self) -> tuple:
        return tuple(range(-self.dim, 0))

    @property
    def h(self) -> float:
        return self.domain_length / self.M

    def coords(self) -> tuple:
        """Collocation coordinates, ``indexing='ij'`` (axis 0 is x)."""
        x = np.arange(self.M) / self.M
        if self.dim == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumber vector for every full-FFT grid index.

        Shape ``(dim, M, ..., M)``.  Entry at index ``i`` is the negation of
        the entry at the reflected index ``-i mod M`` except on the Nyquist
        planes, which are outside every cutoff.
        """
        k1 = np.fft.fftfreq(self.M, d=1.0 / self.M).astype(np.int64)
        return np.stack(np.meshgrid(*([k1] * self.dim), indexing="ij"))

    # transforms -----------------------------------------------------------

    def forward(self, f: np.ndarray) -> np.ndarray:
        return sfft.rfftn(f, axes=self.axes) / self.M**self.dim

    def backward(self, c: np.ndarray) -> np.ndarray:
        return sfft.irfftn(c * self.M**self.dim, s=self.shape, axes=self.axes)

    # compact layout: only the retained modes, rows kx = 0..N, -N..-1 and
    # columns ky = 0..N; valid for band-limited fields or when the result is
    # truncated anyway.  2D only.

    def compact_wavenumbers(self) -> tuple:
        N = self.N
        kx = np.concatenate([np.arange(N + 1), np.arange(-N, 0)]).astype(float)
        return kx[:, None], np.arange(N + 1, dtype=float)[None, :]

    def forward_compact(self, f: np.ndarray) -> np.ndarray:
        N, M = self.N, self.M
        c = sfft.rfft(f, axis=-1)[..., : N + 1]
        c = sfft.fft(c, axis=-2)
        return np.concatenate([c[..., : N + 1, :], c[..., M - N :, :]], axis=-2) / (M * M)

    def backward_compact(self, c: np.ndarray) -> np.ndarray:
        N, M = self.N, self.M
        full = np.zeros(c.shape[:-2] + (M, N + 1), dtype=complex)
        full[..., : N + 1, :] = c[..., : N + 1, :]
        full[..., M - N :, :] = c[..., N + 1 :, :]
        g = sfft.ifft(full, axis=-2, norm="forward")
        return sfft.irfft(g, n=M, axis=-1, norm="forward")

    def truncate(self, c: np.ndarray, N: int | None = None) -> np.ndarray:
        if N is None or N == self.N:
            return c * self.mask
        return c * self.band_mask(N)

    def band_mask(self, N: int) -> np.ndarray:
        m = np.ones(1, dtype=bool)
        for kk in self.k:
            m = m & (np.abs(kk) <= N)
        return m

    def spectral_content_above(self, f: np.ndarray, N: int | None = None) -> float:
        """L2 norm of the coefficients outside the cutoff."""
        c = self.forward(f)
        outside = ~self.band_mask(self.N if N is None else N)
        return float(np.sqrt(_parseval_weighted(self, np.where(outside, c, 0.0))))

    def is_band_limited(self, f: np.ndarray, rtol: float = 1e-12) -> bool:
        total = np.sqrt(np.mean(np.asarray(f) ** 2))
        return self.spectral_content_above(f) <= rtol * max(total, np.finfo(float).tiny)

    def zeros(self, *lead: int) -> np.ndarray:
        return np.zeros(tuple(lead) + self.shape)


def _parseval_weighted(grid: SpectralGrid, c: np.ndarray, weight=None) -> float:
    """``sum_k w_k |c_k|^2`` over the full spectrum from rfft-layout ``c``.

    Columns other than ky = 0 and the Nyquist column stand in for their
    conjugate partners and are counted twice.
    """
    a = np.abs(c) ** 2
    if weight is not None:
        a = a * weight
    mult = np.full(c.shape[-1], 2.0)
    mult[0] = 1.0
    if grid.M % 2 == 0:
        mult[-1] = 1.0
    return float(np.sum(a * mult))


def make_grid(N: int, pad_factor=2, dim: int = 2) -> SpectralGrid:
    """Grid retaining modes ``|k|_inf <= N`` on ``M`` points per axis.

    ``M`` is the smallest even integer ``>= pad_factor * (2N + 1)``.
    """
    if int(N) != N or N < 1:
        raise InvalidArgument(f"N must be an integer >= 1, got {N!r}")
    pad = Fraction(pad_factor).limit_denominator(10**6)
    if pad < 1:
        raise InvalidArgument(f"pad_factor must be >= 1, got {pad_factor!r}")
    if dim not in (1, 2):
        raise InvalidArgument(f"dim must be 1 or 2, got {dim!r}")
    N = int(N)
    M = math.ceil(pad * (2 * N + 1))
    M += M % 2

    kfull = np.fft.fftfreq(M, d=1.0 / M)
    khalf = np.fft.rfftfreq(M, d=1.0 / M)
    if dim == 1:
        k = (khalf,)
    else:
        k = (kfull[:, None], khalf[None, :])
    mask = np.ones(1, dtype=bool)
    ksq = 0.0
    for kk in k:
        mask = mask & (np.abs(kk) <= N)
        ksq = ksq + kk**2
    return SpectralGrid(N=N, M=M, pad_factor=pad, dim=dim, k=k, mask=mask,
                        ksq=np.asarray(ksq, dtype=float))


def partial_derivative(grid: SpectralGrid, f: np.ndarray, axis) -> np.ndarray:
    """Spectral derivative along ``axis`` of band-limited ``f``."""
    _require_finite(f, "partial_derivative input")
    ax = _axis_index(axis)
    if ax >= grid.dim:
        raise InvalidArgument(f"axis {axis!r} does not exist on a {grid.dim}D grid")
    c = grid.forward(f)
    return grid.backward(c * (1j * TWO_PI * grid.k[ax]) * grid.mask)


def gradient(grid: SpectralGrid, u: np.ndarray) -> np.ndarray:
    """``G[i, j] = d u_i / d x_j`` for a vector field ``u`` of shape (2, M, M)."""
    _require_finite(u, "gradient input")
    c = grid.forward(u)
    kx, ky = grid.k
    dc = np.stack([c * (1j * TWO_PI * kx), c * (1j * TWO_PI * ky)], axis=1)
    return grid.backward(dc * grid.mask)


def divergence_sym_tensor(grid: SpectralGrid, sigma: np.ndarray) -> np.ndarray:
    """Row divergence ``(div sigma)_i = sum_j d_j sigma_ij``.

    Works on the full 4-entry tensor; symmetry is not assumed.
    """
    _require_finite(sigma, "divergence input")
    c = grid.forward(sigma)
    kx, ky = grid.k
    dc = (1j * TWO_PI) * (c[:, 0] * kx + c[:, 1] * ky)
    return grid.backward(dc * grid.mask)


def galerkin_project(grid: SpectralGrid, f: np.ndarray, N: int | None = None) -> np.ndarray:
    """Zero all coefficients with ``|k|_inf > N`` (grid cutoff by default)."""
    if N is not None and N > grid.N:
        raise InvalidArgument(f"cannot project to N={N} above grid cutoff {grid.N}")
    return grid.backward(grid.truncate(grid.forward(f), N))


def _voigt_multiplier(grid: SpectralGrid, alpha: float) -> np.ndarray:
    return 1.0 + (TWO_PI * alpha) ** 2 * grid.ksq


def voigt_invert(grid: SpectralGrid, f: np.ndarray, alpha: float) -> np.ndarray:
    """Solve ``(I - alpha^2 Laplacian) X = f`` componentwise."""
    if not alpha > 0:
        raise InvalidArgument(f"alpha must be > 0, got {alpha!r}")
    c = grid.forward(f)
    return grid.backward(c * grid.mask / _voigt_multiplier(grid, alpha))


def voigt_forward(grid: SpectralGrid, f: np.ndarray, alpha: float) -> np.ndarray:
    """Apply ``(I - alpha^2 Laplacian)`` to a band-limited field."""
    c = grid.forward(f)
    return grid.backward(c * grid.mask * _voigt_multiplier(grid, alpha))


def dealiased_product(
    grid: SpectralGrid,
    inputs: Sequence[np.ndarray],
    pointwise_map: Callable[..., np.ndarray],
) -> np.ndarray:
    """Evaluate ``pointwise_map(*inputs)`` on the padded grid and truncate.

    The inputs are collocation values, so the map sees the band-limited
    fields at ``M`` points per axis; what comes back is ``P_N`` of the
    interpolant of the pointwise values.
    """
    out = np.asarray(pointwise_map(*inputs), dtype=float)
    _require_finite(out, "pointwise map output")
    return galerkin_project(grid, out)


def mean_integral(f: np.ndarray) -> float:
    """Integral over the unit torus by the collocation rule.

    Exact for trigonometric polynomials of degree below the grid size.
    """
    return float(np.mean(f))
