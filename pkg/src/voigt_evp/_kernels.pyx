# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pointwise kernels; same contract as ``_kernels_py``."""

import numpy as np
from libc.math cimport sqrt, cos, sin

cdef enum:
    SIMPLIFIED = 0
    ORIGINAL = 1
    SMOOTHED_MAX = 2


def constitutive(G, sigma, int variant, double eps, double gamma,
                 double e_bar, double P):
    if variant < 0 or variant > 2:
        raise ValueError(f"unknown strain variant code {variant!r}")
    cdef double[:, :, :, ::1] g = np.ascontiguousarray(G, dtype=np.float64)
    cdef double[:, :, :, ::1] s = np.ascontiguousarray(sigma, dtype=np.float64)
    cdef Py_ssize_t n0 = g.shape[2], n1 = g.shape[3]
    Dfield_arr = np.empty((n0, n1))
    R_arr = np.empty((2, 2, n0, n1))
    cdef double[:, ::1] Df = Dfield_arr
    cdef double[:, :, :, ::1] R = R_arr
    cdef Py_ssize_t i, j
    cdef double d11, d22, d12, tr, dd, dev_sq, dbar, diff, D
    cdef double shear, bulk, half_diff, trp
    cdef double eps2 = eps * eps, gam2 = gamma * gamma
    cdef double e2 = e_bar * e_bar
    cdef double shape = 2.0 / e2
    cdef double shear_c = e2 / P, bulk_c = 1.0 / (2.0 * P)
    for i in range(n0):
        for j in range(n1):
            d11 = g[0, 0, i, j]
            d22 = g[1, 1, i, j]
            d12 = 0.5 * (g[0, 1, i, j] + g[1, 0, i, j])
            if variant == SIMPLIFIED:
                D = sqrt(d11 * d11 + 2.0 * d12 * d12 + d22 * d22 + eps2)
            else:
                tr = d11 + d22
                dd = 0.5 * (d11 - d22)
                dev_sq = 2.0 * dd * dd + 2.0 * d12 * d12
                if variant == ORIGINAL:
                    D = sqrt(shape * dev_sq + tr * tr + eps2)
                else:
                    dbar = sqrt(shape * dev_sq + tr * tr)
                    diff = dbar - eps
                    if gamma == 0.0:
                        D = dbar if dbar > eps else eps
                    else:
                        D = 0.5 * (dbar + eps + gamma) + 0.5 * sqrt(diff * diff + gam2)
            Df[i, j] = D
            shear = shear_c * D
            bulk = D * bulk_c
            half_diff = 0.5 * (s[0, 0, i, j] - s[1, 1, i, j])
            trp = s[0, 0, i, j] + s[1, 1, i, j] + P
            R[0, 0, i, j] = shear * half_diff + bulk * trp
            R[1, 1, i, j] = -shear * half_diff + bulk * trp
            R[0, 1, i, j] = shear * s[0, 1, i, j]
            R[1, 0, i, j] = shear * s[1, 0, i, j]
    return Dfield_arr, R_arr


def drag(V, double coef, double angle):
    shape = np.shape(V)
    cdef double[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64).reshape(2, -1)
    cdef Py_ssize_t n = v.shape[1], i
    out_arr = np.empty((2, n))
    cdef double[:, ::1] out = out_arr
    cdef double c = cos(angle), s = sin(angle), speed
    for i in range(n):
        speed = coef * sqrt(v[0, i] * v[0, i] + v[1, i] * v[1, i])
        out[0, i] = speed * (c * v[0, i] - s * v[1, i])
        out[1, i] = speed * (c * v[1, i] + s * v[0, i])
    return out_arr.reshape(shape)
