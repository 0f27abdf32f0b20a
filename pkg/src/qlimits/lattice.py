"""Periodic grids on [-L, L)^d and the wavefunctions sampled on them.

Position samples sit at ``x_k = -L + k h`` with ``h = 2L/N``.  Frequency
samples sit at ``alpha_j = j pi / L`` for ``j = -N/2, ..., N/2 - 1`` and are
stored in that ascending order (the ``fftshift`` layout), so index ``k`` of a
frequency array corresponds to ``j = k - N/2``.

The Fourier map uses the continuum convention

    (F u)(alpha) = (2 pi)^(-d/2) \\int u(x) exp(-i alpha.x) dx,

discretised so that it is unitary between the position inner product
(weight ``h^d``) and the frequency inner product (weight ``dalpha^d``).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

POSITION = "position"
FREQUENCY = "frequency"


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid with ``points`` samples per axis."""

    dim: int
    half_width: float
    points: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if int(self.points) != self.points or self.points < 4 or self.points % 2:
            raise ValueError(f"points must be an even integer >= 4, got {self.points}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "half_width", float(self.half_width))
        object.__setattr__(self, "points", int(self.points))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def frequency_spacing(self) -> float:
        return pi / self.half_width

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    def cell_volume(self, domain: str) -> float:
        step = self.spacing if domain == POSITION else self.frequency_spacing
        return step**self.dim

    def index_offsets(self) -> np.ndarray:
        """Signed frequency indices ``j`` in storage order."""
        return np.arange(self.points) - self.points // 2

    def dual(self) -> "GridSpec":
        """Grid whose position axis is this grid's frequency axis (and vice versa)."""
        return GridSpec(self.dim, pi * self.points / (2.0 * self.half_width), self.points)


def _check_axis(grid: GridSpec, axis: int):
    if not 0 <= axis < grid.dim:
        raise IndexError(f"axis {axis} out of range for dim={grid.dim}")


def position_axis(grid: GridSpec, axis: int = 0) -> np.ndarray:
    _check_axis(grid, axis)
    return -grid.half_width + grid.spacing * np.arange(grid.points)


def frequency_axis(grid: GridSpec, axis: int = 0) -> np.ndarray:
    _check_axis(grid, axis)
    return grid.index_offsets() * grid.frequency_spacing


def axis_values(grid: GridSpec, domain: str, axis: int = 0) -> np.ndarray:
    return position_axis(grid, axis) if domain == POSITION else frequency_axis(grid, axis)


def mesh(grid: GridSpec, domain: str = POSITION) -> list[np.ndarray]:
    """Broadcastable coordinate arrays, one per axis (``ij`` indexing)."""
    axes = [axis_values(grid, domain, a) for a in range(grid.dim)]
    out = []
    for a, ax in enumerate(axes):
        shape = [1] * grid.dim
        shape[a] = grid.points
        out.append(ax.reshape(shape))
    return out


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex samples of a function on ``grid`` in one of the two domains.

    ``samples`` has shape ``(N,) * d``; flattening in C order gives the
    row-major layout.  The array is marked read-only.
    """

    grid: GridSpec
    samples: np.ndarray
    domain: str = POSITION

    def __post_init__(self):
        if self.domain not in (POSITION, FREQUENCY):
            raise ValueError(f"unknown domain tag {self.domain!r}")
        arr = np.array(self.samples, dtype=np.complex128)
        if arr.size != self.grid.points**self.grid.dim:
            raise ValueError(
                f"expected {self.grid.points ** self.grid.dim} samples, got {arr.size}"
            )
        arr = arr.reshape(self.grid.shape)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def with_samples(self, samples, domain: str | None = None) -> "WaveFunction":
        return WaveFunction(self.grid, samples, self.domain if domain is None else domain)

    def relabel(self, domain: str) -> "WaveFunction":
        """Same samples, reinterpreted as living in ``domain``."""
        return WaveFunction(self.grid, self.samples, domain)

    def __add__(self, other: "WaveFunction") -> "WaveFunction":
        _check_compatible(self, other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "WaveFunction") -> "WaveFunction":
        _check_compatible(self, other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, c) -> "WaveFunction":
        return self.with_samples(c * self.samples)

    __rmul__ = __mul__


def _check_compatible(u: WaveFunction, v: WaveFunction):
    if u.grid != v.grid:
        raise GridMismatchError(f"grid mismatch: {u.grid} vs {v.grid}")
    if u.domain != v.domain:
        raise GridMismatchError(f"domain mismatch: {u.domain} vs {v.domain}")


def inner(u: WaveFunction, v: WaveFunction) -> complex:
    """Discrete L2 pairing, conjugate-linear in ``u``."""
    _check_compatible(u, v)
    return complex(np.vdot(u.samples, v.samples) * u.grid.cell_volume(u.domain))


def norm(u: WaveFunction) -> float:
    return float(np.sqrt(np.vdot(u.samples, u.samples).real * u.grid.cell_volume(u.domain)))


def normalize(u: WaveFunction) -> WaveFunction:
    nrm = norm(u)
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ValueError("cannot normalize a zero (or non-finite) wavefunction")
    return u.with_samples(u.samples / nrm)


def _parity(grid: GridSpec) -> np.ndarray:
    """Product over axes of (-1)^j, in storage order."""
    sign = np.where(grid.index_offsets() % 2 == 0, 1.0, -1.0)
    out = np.ones(grid.shape)
    for a in range(grid.dim):
        shape = [1] * grid.dim
        shape[a] = grid.points
        out = out * sign.reshape(shape)
    return out


def fourier(u: WaveFunction) -> WaveFunction:
    """Unitary Fourier transform, position samples -> frequency samples."""
    if u.domain != POSITION:
        raise ValueError("fourier expects a position-domain wavefunction")
    g = u.grid
    scale = (g.spacing / np.sqrt(2 * pi)) ** g.dim
    spec = np.fft.fftshift(np.fft.fftn(u.samples))
    return WaveFunction(g, scale * _parity(g) * spec, FREQUENCY)


def inverse_fourier(v: WaveFunction) -> WaveFunction:
    """Inverse of :func:`fourier`, frequency samples -> position samples."""
    if v.domain != FREQUENCY:
        raise ValueError("inverse_fourier expects a frequency-domain wavefunction")
    g = v.grid
    scale = (g.frequency_spacing * g.points / np.sqrt(2 * pi)) ** g.dim
    vals = np.fft.ifftn(np.fft.ifftshift(_parity(g) * v.samples))
    return WaveFunction(g, scale * vals, POSITION)


def position_moments(u: WaveFunction) -> tuple[np.ndarray, float]:
    """Mean position and the largest per-axis standard deviation of ``|u|^2``."""
    return _moments(u.samples, u.grid, POSITION)


def _moments(samples, grid, domain):
    dens = np.abs(samples) ** 2
    total = dens.sum()
    if total == 0:
        raise ValueError("zero wavefunction has no moments")
    dens = dens / total
    centers, spread = [], 0.0
    for coords in mesh(grid, domain):
        mean = float((dens * coords).sum())
        var = float((dens * (coords - mean) ** 2).sum())
        centers.append(mean)
        spread = max(spread, np.sqrt(var))
    return np.array(centers), spread


def frequency_moments(u: WaveFunction) -> tuple[np.ndarray, float]:
    return _moments(fourier(u).samples if u.domain == POSITION else u.samples, u.grid, FREQUENCY)


# --- packets ---------------------------------------------------------------

def _hermite_function(n: int, t: np.ndarray) -> np.ndarray:
    """Normalised Hermite function of order ``n`` via the stable recurrence."""
    prev = np.zeros_like(t)
    cur = pi**-0.25 * np.exp(-0.5 * t * t)
    for k in range(n):
        prev, cur = cur, np.sqrt(2.0 / (k + 1)) * t * cur - np.sqrt(k / (k + 1)) * prev
    return cur


def hermite_packet(grid: GridSpec, order, center=None, width: float = 1.0,
                   momentum=None) -> WaveFunction:
    """Product of 1-d Hermite functions, scaled by ``width`` and boosted.

    Order zero on every axis is the normalised Gaussian packet
    ``pi^(-d/4) w^(-d/2) exp(-|x-c|^2 / (2 w^2) + i k.x)``.
    """
    d = grid.dim
    order = np.broadcast_to(np.asarray(order, dtype=int), (d,))
    center = np.zeros(d) if center is None else np.broadcast_to(np.asarray(center, float), (d,))
    momentum = np.zeros(d) if momentum is None else np.broadcast_to(np.asarray(momentum, float), (d,))
    if width <= 0:
        raise ValueError("width must be positive")
    vals = np.ones(grid.shape, dtype=np.complex128)
    for a, x in enumerate(mesh(grid, POSITION)):
        t = (x - center[a]) / width
        vals = vals * _hermite_function(int(order[a]), t) / np.sqrt(width)
        vals = vals * np.exp(1j * momentum[a] * x)
    return WaveFunction(grid, vals, POSITION)


def gaussian_packet(grid: GridSpec, center=None, width: float = 1.0, momentum=None) -> WaveFunction:
    return hermite_packet(grid, 0, center, width, momentum)
