# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: lattice trigonometric polynomials and the KS sweep.

Every function here has a numpy twin in ``_pykernels`` with the same
signature; ``qlimits.kernels`` picks one at import time.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef enum:
    BLOCK = 8


# Complex arithmetic is spelled out on real and imaginary parts: this skips the
# C99 NaN-recovery path of complex multiply, and with -ffp-contract=off the
# rounding is the same on every platform.  The numpy twin agrees to ~1e-13
# but not bitwise (numpy may fuse multiply-adds depending on the CPU).
# Points are processed in blocks of BLOCK independent Horner chains to hide
# multiply latency.

def horner_1d(const double complex[::1] coeffs, const double complex[::1] z):
    """Return ``sum_j coeffs[j] * z[m]**j`` for every point ``m``."""
    cdef Py_ssize_t n = coeffs.shape[0]
    cdef Py_ssize_t m_pts = z.shape[0]
    out = np.empty(m_pts, dtype=np.complex128)
    cdef double[:, ::1] res = out.view(np.float64).reshape(m_pts, 2)
    cdef const double[:, ::1] c = np.asarray(coeffs).view(np.float64).reshape(n, 2)
    cdef const double[:, ::1] zz = np.asarray(z).view(np.float64).reshape(m_pts, 2)
    cdef Py_ssize_t m0, m, j, b, nb
    cdef double ar[BLOCK]
    cdef double ai[BLOCK]
    cdef double zr[BLOCK]
    cdef double zi[BLOCK]
    cdef double tr
    with nogil:
        m0 = 0
        while m0 < m_pts:
            nb = min(<Py_ssize_t>BLOCK, m_pts - m0)
            for b in range(nb):
                zr[b] = zz[m0 + b, 0]
                zi[b] = zz[m0 + b, 1]
                ar[b] = 0.0
                ai[b] = 0.0
            if nb == BLOCK:
                # fixed trip count lets the compiler vectorise across the block
                for j in range(n - 1, -1, -1):
                    for b in range(BLOCK):
                        tr = ar[b] * zr[b] - ai[b] * zi[b]
                        ai[b] = (ar[b] * zi[b] + ai[b] * zr[b]) + c[j, 1]
                        ar[b] = tr + c[j, 0]
            else:
                for j in range(n - 1, -1, -1):
                    for b in range(nb):
                        tr = ar[b] * zr[b] - ai[b] * zi[b]
                        ai[b] = (ar[b] * zi[b] + ai[b] * zr[b]) + c[j, 1]
                        ar[b] = tr + c[j, 0]
            for b in range(nb):
                res[m0 + b, 0] = ar[b]
                res[m0 + b, 1] = ai[b]
            m0 += BLOCK
    return out


def horner_2d(const double complex[:, ::1] coeffs,
              const double complex[::1] z0,
              const double complex[::1] z1):
    """Return ``sum_{j,k} coeffs[j, k] * z0[m]**j * z1[m]**k``."""
    cdef Py_ssize_t n0 = coeffs.shape[0]
    cdef Py_ssize_t n1 = coeffs.shape[1]
    cdef Py_ssize_t m_pts = z0.shape[0]
    out = np.empty(m_pts, dtype=np.complex128)
    cdef double[:, ::1] res = out.view(np.float64).reshape(m_pts, 2)
    cdef const double[:, :, ::1] c = np.asarray(coeffs).view(np.float64).reshape(n0, n1, 2)
    cdef const double[:, ::1] za = np.asarray(z0).view(np.float64).reshape(m_pts, 2)
    cdef const double[:, ::1] zb = np.asarray(z1).view(np.float64).reshape(m_pts, 2)
    cdef Py_ssize_t m0, j, k, b, nb
    cdef double outr[BLOCK]
    cdef double outi[BLOCK]
    cdef double inr[BLOCK]
    cdef double ini[BLOCK]
    cdef double ar[BLOCK]
    cdef double ai[BLOCK]
    cdef double br[BLOCK]
    cdef double bi[BLOCK]
    cdef double tr
    with nogil:
        m0 = 0
        while m0 < m_pts:
            nb = min(<Py_ssize_t>BLOCK, m_pts - m0)
            for b in range(nb):
                ar[b] = za[m0 + b, 0]
                ai[b] = za[m0 + b, 1]
                br[b] = zb[m0 + b, 0]
                bi[b] = zb[m0 + b, 1]
                outr[b] = 0.0
                outi[b] = 0.0
            for j in range(n0 - 1, -1, -1):
                for b in range(nb):
                    inr[b] = 0.0
                    ini[b] = 0.0
                for k in range(n1 - 1, -1, -1):
                    for b in range(nb):
                        tr = inr[b] * br[b] - ini[b] * bi[b]
                        ini[b] = (inr[b] * bi[b] + ini[b] * br[b]) + c[j, k, 1]
                        inr[b] = tr + c[j, k, 0]
                for b in range(nb):
                    tr = outr[b] * ar[b] - outi[b] * ai[b]
                    outi[b] = (outr[b] * ai[b] + outi[b] * ar[b]) + ini[b]
                    outr[b] = tr + inr[b]
            for b in range(nb):
                res[m0 + b, 0] = outr[b]
                res[m0 + b, 1] = outi[b]
            m0 += BLOCK
    return out


def ks_sweep(const double[::1] xs, const double[::1] ys):
    """Sup distance between the right-continuous ECDFs of two sorted samples."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t m = ys.shape[0]
    cdef Py_ssize_t i = 0, j = 0
    cdef double d = 0.0, diff, v
    with nogil:
        while i < n and j < m:
            v = xs[i] if xs[i] <= ys[j] else ys[j]
            # consume every tie at v on both sides before comparing
            while i < n and xs[i] == v:
                i += 1
            while j < m and ys[j] == v:
                j += 1
            diff = <double>i / n - <double>j / m
            if diff < 0:
                diff = -diff
            if diff > d:
                d = diff
    return d
