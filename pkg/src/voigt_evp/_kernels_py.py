"""Pure-numpy pointwise kernels (fallback for the compiled extension).

Both backends expose the same two functions with identical signatures;
see :mod:`voigt_evp.kernels` for the selection logic.
"""

import numpy as np

SIMPLIFIED, ORIGINAL, SMOOTHED_MAX = 0, 1, 2


def constitutive(G, sigma, variant, eps, gamma, e_bar, P):
    """Strain-rate field and relaxation tensor from a velocity gradient.

    ``G[i, j] = du_i/dx_j`` and ``sigma`` are (2, 2, M, M).  Returns
    ``(Dfield, R)`` with ``R = (e^2 D/P) dev(sigma) + (D/2P)(tr sigma + P) I``.
    """
    d11 = G[0, 0]
    d22 = G[1, 1]
    d12 = 0.5 * (G[0, 1] + G[1, 0])
    if variant == SIMPLIFIED:
        Dfield = np.sqrt(d11 * d11 + 2.0 * d12 * d12 + d22 * d22 + eps * eps)
    else:
        tr = d11 + d22
        dd = 0.5 * (d11 - d22)
        dev_sq = 2.0 * dd * dd + 2.0 * d12 * d12
        if variant == ORIGINAL:
            Dfield = np.sqrt((2.0 / (e_bar * e_bar)) * dev_sq + tr * tr + eps * eps)
        elif variant == SMOOTHED_MAX:
            Dbar = np.sqrt((2.0 / (e_bar * e_bar)) * dev_sq + tr * tr)
            if gamma == 0.0:
                Dfield = np.maximum(Dbar, eps)
            else:
                diff = Dbar - eps
                Dfield = 0.5 * (Dbar + eps + gamma) + 0.5 * np.sqrt(diff * diff + gamma * gamma)
        else:
            raise ValueError(f"unknown strain variant code {variant!r}")

    shear = (e_bar * e_bar / P) * Dfield
    bulk = Dfield / (2.0 * P)
    half_diff = 0.5 * (sigma[0, 0] - sigma[1, 1])
    trp = sigma[0, 0] + sigma[1, 1] + P
    R = np.empty_like(sigma)
    R[0, 0] = shear * half_diff + bulk * trp
    R[1, 1] = -shear * half_diff + bulk * trp
    R[0, 1] = shear * sigma[0, 1]
    R[1, 0] = shear * sigma[1, 0]
    return Dfield, R


def drag(V, coef, angle):
    """``coef |V| (V cos(angle) + V_perp sin(angle))`` for V of shape (2, ...)."""
    c, s = np.cos(angle), np.sin(angle)
    speed = coef * np.sqrt(V[0] * V[0] + V[1] * V[1])
    out = np.empty_like(V)
    out[0] = speed * (c * V[0] - s * V[1])
    out[1] = speed * (c * V[1] + s * V[0])
    return out
