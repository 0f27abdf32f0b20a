"""Numpy implementations of the hot loops (fallback backend)."""

import numpy as np


def horner_1d(coeffs, z):
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    acc = np.zeros(z.shape, dtype=np.complex128)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def horner_2d(coeffs, z0, z1):
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    z0 = np.asarray(z0, dtype=np.complex128)
    z1 = np.asarray(z1, dtype=np.complex128)
    # inner[m, j] = sum_k coeffs[j, k] z1[m]**k
    inner = np.zeros((z1.shape[0], coeffs.shape[0]), dtype=np.complex128)
    for k in range(coeffs.shape[1] - 1, -1, -1):
        inner = inner * z1[:, None] + coeffs[:, k][None, :]
    acc = np.zeros(z0.shape, dtype=np.complex128)
    for j in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * z0 + inner[:, j]
    return acc


def ks_sweep(xs, ys):
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    pooled = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, pooled, side="right") / xs.size
    cdf_y = np.searchsorted(ys, pooled, side="right") / ys.size
    return float(np.max(np.abs(cdf_x - cdf_y)))
