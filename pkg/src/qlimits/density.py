"""Pure states, their kernels, bounded test operators and trace functionals.

Density operators are never stored as matrices.  A pure state is kept as its
unit vector ``u`` and the kernel ``rho[u](x, y) = u(x) conj(u(y))`` is
evaluated on demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import (
    FREQUENCY,
    POSITION,
    GridMismatchError,
    GridSpec,
    WaveFunction,
    axis_values,
    fourier,
    inner,
    norm,
)

NORM_TOL = 1e-10
GRID_TOL = 1e-12


class OffGridError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PureDensity:
    u: WaveFunction

    def __post_init__(self):
        if self.u.domain != POSITION:
            raise ValueError("pure states are built from position-domain vectors")
        if abs(norm(self.u) - 1.0) > NORM_TOL:
            raise ValueError(f"state vector not normalised (norm={norm(self.u)!r})")

    @property
    def grid(self) -> GridSpec:
        return self.u.grid


@dataclass(frozen=True)
class KernelPoint:
    """A pair of grid points ``(x, y)``, or ``(alpha, beta)`` in the frequency domain."""

    x: tuple
    y: tuple
    domain: str = POSITION

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(self.x)))
        object.__setattr__(self, "y", tuple(float(v) for v in np.atleast_1d(self.y)))
        if self.domain not in (POSITION, FREQUENCY):
            raise ValueError(f"unknown domain {self.domain!r}")

    def indices(self, grid: GridSpec) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return grid_index(grid, self.x, self.domain), grid_index(grid, self.y, self.domain)

    @property
    def diagonal(self) -> bool:
        return self.x == self.y


def grid_index(grid: GridSpec, point, domain: str = POSITION) -> tuple[int, ...]:
    """Storage index of ``point``; raises :class:`OffGridError` if it is not a node."""
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if point.size != grid.dim:
        raise OffGridError(f"point {tuple(point)} has wrong dimension for dim={grid.dim}")
    idx = []
    for a, q in enumerate(point):
        ax = axis_values(grid, domain, a)
        k = int(np.argmin(np.abs(ax - q)))
        if abs(ax[k] - q) > GRID_TOL * max(1.0, abs(q)):
            raise OffGridError(f"{domain} coordinate {q!r} (axis {a}) is not a grid node")
        idx.append(k)
    return tuple(idx)


def kernel_at(rho: PureDensity, p: KernelPoint) -> complex:
    """``rho(x, y) = u(x) conj(u(y))``."""
    if p.domain != POSITION:
        raise ValueError("kernel_at takes a position-domain point")
    ix, iy = p.indices(rho.grid)
    return complex(rho.u.samples[ix] * np.conj(rho.u.samples[iy]))


def fourier_kernel_at(rho: PureDensity, p: KernelPoint) -> complex:
    """Kernel of ``F rho F^{-1}`` at ``(alpha, beta)``, i.e. ``Fu(alpha) conj(Fu(beta))``."""
    if p.domain != FREQUENCY:
        raise ValueError("fourier_kernel_at takes a frequency-domain point")
    ia, ib = p.indices(rho.grid)
    fu = fourier(rho.u).samples
    return complex(fu[ia] * np.conj(fu[ib]))


# --- bounded operators -----------------------------------------------------

class BoundedOperator:
    """Base class; subclasses implement ``apply`` and ``operator_norm_bound``."""

    grid: GridSpec

    def apply(self, u: WaveFunction) -> WaveFunction:
        raise NotImplementedError

    @property
    def operator_norm_bound(self) -> float:
        raise NotImplementedError

    def _check(self, u: WaveFunction):
        if u.grid != self.grid or u.domain != POSITION:
            raise GridMismatchError("operator and vector live on different grids")


class Multiplication(BoundedOperator):
    """``(A u)(x) = m(x) u(x)`` for bounded samples ``m`` on the position grid."""

    def __init__(self, grid: GridSpec, m):
        m = np.broadcast_to(np.asarray(m, dtype=np.complex128), grid.shape).copy()
        if not np.all(np.isfinite(m)):
            raise ValueError("multiplier must be finite")
        m.setflags(write=False)
        self.grid = grid
        self.m = m

    def apply(self, u):
        self._check(u)
        return u.with_samples(self.m * u.samples)

    @property
    def operator_norm_bound(self):
        return float(np.max(np.abs(self.m)))


class RankOne(BoundedOperator):
    """``|v><w|``."""

    def __init__(self, v: WaveFunction, w: WaveFunction):
        if v.grid != w.grid or v.domain != POSITION or w.domain != POSITION:
            raise GridMismatchError("rank-one factors must share a position grid")
        self.grid = v.grid
        self.v = v
        self.w = w

    def apply(self, u):
        self._check(u)
        return self.v * inner(self.w, u)

    @property
    def operator_norm_bound(self):
        return norm(self.v) * norm(self.w)


def projector(v: WaveFunction) -> RankOne:
    return RankOne(v, v)


class FiniteMatrix(BoundedOperator):
    """``sum_ij M_ij |b_i><b_j|`` over an orthonormal family ``b``."""

    def __init__(self, basis, matrix):
        basis = list(basis)
        if not basis:
            raise ValueError("empty basis")
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.shape != (len(basis), len(basis)):
            raise ValueError(f"matrix shape {matrix.shape} does not match basis size {len(basis)}")
        grid = basis[0].grid
        if any(b.grid != grid or b.domain != POSITION for b in basis):
            raise GridMismatchError("basis vectors must share a position grid")
        gram = np.array([[inner(bi, bj) for bj in basis] for bi in basis])
        if np.max(np.abs(gram - np.eye(len(basis)))) > NORM_TOL:
            raise ValueError("basis is not orthonormal within 1e-10")
        self.grid = grid
        self.basis = basis
        self.matrix = matrix

    def apply(self, u):
        self._check(u)
        coeffs = self.matrix @ np.array([inner(b, u) for b in self.basis])
        out = sum(c * b.samples for c, b in zip(coeffs, self.basis))
        return u.with_samples(out)

    @property
    def operator_norm_bound(self):
        return float(np.linalg.norm(self.matrix, 2))


def apply_operator(A: BoundedOperator, u: WaveFunction) -> WaveFunction:
    return A.apply(u)


def trace_functional(rho: PureDensity, A: BoundedOperator) -> complex:
    """``tr(rho[u] A) = <u, A u>``."""
    return inner(rho.u, A.apply(rho.u))


def trace_distance_pure(u: WaveFunction, v: WaveFunction) -> float:
    """Trace norm of ``rho[u] - rho[v]`` for unit vectors: ``2 sqrt(1 - |<u,v>|^2)``."""
    for w in (u, v):
        if abs(norm(w) - 1.0) > NORM_TOL:
            raise ValueError("trace_distance_pure needs normalised inputs")
    # 1 - |<u,v>|^2 = |v - <u,v> u|^2 for unit vectors; the residual form avoids
    # the cancellation that costs half the digits when v is close to u
    u = u * (1.0 / norm(u))
    v = v * (1.0 / norm(v))
    return 2.0 * norm(v - u * inner(u, v))
