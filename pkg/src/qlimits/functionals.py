"""Batched evaluation of ``s -> probe(rho[C_s u])`` for a shift or impulse channel ``C``.

On the periodic grid every such map is a trigonometric polynomial in ``s``
whose frequencies sit on a regular lattice, e.g. for a shift

    (S_s u)(x) = sum_j b_j exp(i alpha_j (x + s)),

so a probe value is a short algebraic combination of lattice polynomials
``sum_j c_j exp(i (j0 + j) step . s)``.  Those are evaluated by nested Horner
in the compiled kernels.  This is the collapsed fast path; ``exact`` re-runs
the FFT-based channel for cross-checking.
"""

from __future__ import annotations

from math import pi

import numpy as np
from scipy import signal

from . import kernels
from .channels import CHANNELS
from .density import (
    BoundedOperator,
    FiniteMatrix,
    KernelPoint,
    Multiplication,
    PureDensity,
    RankOne,
    fourier_kernel_at,
    kernel_at,
    trace_functional,
)
from .lattice import FREQUENCY, POSITION, WaveFunction, fourier, mesh

VACUITY_RTOL = 1e-10


class LatticePoly:
    """``p(s) = sum_j coeffs[j] exp(i sum_a (start_a + j_a) step_a s_a)``."""

    def __init__(self, coeffs, start, step):
        self.coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
        d = self.coeffs.ndim
        self.start = np.broadcast_to(np.asarray(start, dtype=float), (d,)).copy()
        self.step = np.broadcast_to(np.asarray(step, dtype=float), (d,)).copy()

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float).reshape(-1, self.coeffs.ndim)
        z = np.exp(1j * s * self.step)
        lead = np.exp(1j * (s * (self.start * self.step)).sum(axis=1))
        return lead * _horner(self.coeffs, z)


def _horner(coeffs, z):
    d = coeffs.ndim
    if d == 1:
        return kernels.horner_1d(coeffs, np.ascontiguousarray(z[:, 0]))
    if d == 2:
        return kernels.horner_2d(coeffs, np.ascontiguousarray(z[:, 0]),
                                 np.ascontiguousarray(z[:, 1]))
    # higher dimensions: contract trailing axes pointwise, numpy only
    out = np.empty(z.shape[0], dtype=np.complex128)
    for m in range(z.shape[0]):
        acc = coeffs
        for a in range(d - 1, -1, -1):
            acc = np.polynomial.polynomial.polyval(z[m, a], np.moveaxis(acc, a, 0), tensor=False)
        out[m] = acc
    return out


class Functional:
    """Probe value as a function of the (collapsed) channel parameter."""

    def __init__(self, u, target, channel, evaluate, real_valued, norm_bound=None):
        self.u = u
        self.target = target
        self.channel = channel
        self._evaluate = evaluate
        self.real_valued = real_valued
        self.operator_norm_bound = norm_bound

    def __call__(self, s) -> np.ndarray:
        vals = self._evaluate(np.asarray(s, dtype=float).reshape(-1, self.u.grid.dim))
        return vals.real.copy() if self.real_valued else vals

    def exact(self, s) -> complex:
        """Slow path: apply the channel on the grid, then evaluate the probe."""
        state = CHANNELS[self.channel](self.u, s)
        rho = PureDensity(state)
        if isinstance(self.target, KernelPoint):
            if self.target.domain == POSITION:
                return kernel_at(rho, self.target)
            return fourier_kernel_at(rho, self.target)
        return trace_functional(rho, self.target)

    def is_vacuous(self) -> bool:
        """True when the value does not depend on the channel parameter at all."""
        pts = _probe_shifts(self.u.grid, self.channel)
        vals = self._evaluate(pts)
        ref = vals[0]
        return bool(np.max(np.abs(vals - ref)) <= VACUITY_RTOL * max(1.0, abs(ref)))


def _probe_shifts(grid, channel, count=17):
    # deterministic, irrational-ratio spread of parameters over a quarter period
    reach = grid.half_width if channel == "shift" else pi / grid.spacing
    i = np.arange(count)[:, None]
    a = np.arange(grid.dim)[None, :]
    frac = np.mod(i * 0.6180339887498949 + a * 0.4142135623730951, 1.0)
    pts = (frac - 0.5) * 0.5 * reach
    pts[0] = 0.0
    return pts


# --- lattice polynomial builders -------------------------------------------

def _scaled_spectrum(u: WaveFunction):
    g = u.grid
    return (g.frequency_spacing / np.sqrt(2 * pi)) ** g.dim * fourier(u).samples


def _phase_on(grid, domain, point, sign=1.0):
    arg = sum(point[a] * q for a, q in enumerate(mesh(grid, domain)))
    return np.exp(sign * 1j * arg)


def overlap_poly(u: WaveFunction, w: WaveFunction, channel: str) -> LatticePoly:
    """``s -> <w, C_s u>``."""
    g = u.grid
    half = g.points // 2
    if channel == "shift":
        coeffs = g.cell_volume(FREQUENCY) * np.conj(fourier(w).samples) * fourier(u).samples
        return LatticePoly(coeffs, -half, g.frequency_spacing)
    coeffs = g.cell_volume(POSITION) * np.conj(w.samples) * u.samples
    return LatticePoly(coeffs, -half, g.spacing)


def _point_value_poly(u, point, channel) -> LatticePoly:
    """``s -> (S_s u)(x)`` for shifts, ``s -> F(R_s u)(alpha)`` for impulses."""
    g = u.grid
    half = g.points // 2
    if channel == "shift":
        coeffs = _scaled_spectrum(u) * _phase_on(g, FREQUENCY, point)
        return LatticePoly(coeffs, -half, g.frequency_spacing)
    scale = (g.spacing / np.sqrt(2 * pi)) ** g.dim
    coeffs = scale * u.samples * _phase_on(g, POSITION, point, sign=-1.0)
    return LatticePoly(coeffs, -half, g.spacing)


def _multiplication_poly(u, m) -> LatticePoly:
    """``s -> h^d sum_x m(x) |(S_s u)(x)|^2``."""
    g = u.grid
    n = g.points
    b = _scaled_spectrum(u)
    corr = signal.correlate(b, b, mode="full", method="auto")
    lags = np.arange(-(n - 1), n)
    sign = np.where(lags % 2 == 0, 1.0, -1.0)
    mt = n**g.dim * np.fft.ifftn(m)
    idx = np.mod(lags, n)
    mcheck = mt[np.ix_(*([idx] * g.dim))]
    for a in range(g.dim):
        shape = [1] * g.dim
        shape[a] = lags.size
        mcheck = mcheck * sign.reshape(shape)
    coeffs = g.cell_volume(POSITION) * mcheck * corr
    return LatticePoly(coeffs, -(n - 1), g.frequency_spacing)


def build_functional(u: WaveFunction, target, channel: str) -> Functional:
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    g = u.grid
    if isinstance(target, KernelPoint):
        x, y = np.array(target.x), np.array(target.y)
        ix, iy = target.indices(g)
        real = target.diagonal
        # kernel of the un-moved state at the probe, in the probe's own domain
        base = u.samples if target.domain == POSITION else fourier(u).samples
        const = base[ix] * np.conj(base[iy])
        single_phase = (target.domain == FREQUENCY) == (channel == "shift")
        if single_phase:
            diff = x - y

            def evaluate(s):
                return const * np.exp(1j * (s @ diff))
        else:
            px = _point_value_poly(u, x, channel)
            py = px if target.diagonal else _point_value_poly(u, y, channel)

            def evaluate(s):
                vx = px(s)
                vy = vx if py is px else py(s)
                return vx * np.conj(vy)
        return Functional(u, target, channel, evaluate, real)

    if not isinstance(target, BoundedOperator):
        raise TypeError(f"unsupported probe target {type(target).__name__}")
    bound = target.operator_norm_bound

    if isinstance(target, Multiplication):
        real = not np.any(target.m.imag)
        if channel == "impulse":
            const = g.cell_volume(POSITION) * np.sum(target.m * np.abs(u.samples) ** 2)

            def evaluate(s):
                return np.full(s.shape[0], const, dtype=np.complex128)
        else:
            evaluate = _multiplication_poly(u, target.m)
        return Functional(u, target, channel, evaluate, real, bound)

    if isinstance(target, RankOne):
        pw = overlap_poly(u, target.w, channel)
        same = target.v is target.w or np.array_equal(target.v.samples, target.w.samples)
        pv = pw if same else overlap_poly(u, target.v, channel)

        def evaluate(s):
            a = pw(s)
            b = a if pv is pw else pv(s)
            return np.conj(b) * a
        return Functional(u, target, channel, evaluate, same, bound)

    if isinstance(target, FiniteMatrix):
        polys = [overlap_poly(u, b, channel) for b in target.basis]
        mat = target.matrix
        real = bool(np.allclose(mat, mat.conj().T, atol=1e-14, rtol=0))

        def evaluate(s):
            p = np.stack([q(s) for q in polys], axis=1)
            return np.einsum("mi,ij,mj->m", np.conj(p), mat, p)
        return Functional(u, target, channel, evaluate, real, bound)

    raise TypeError(f"unsupported operator {type(target).__name__}")
