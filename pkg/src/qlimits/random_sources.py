"""Random-vector laws, Gaussian and Wiener samplers, and seeded stream derivation.

Stream derivation rule (stable, documented so results are bit-reproducible)::

    digest = SHA-256( uint64_le(master_seed) || utf8(label) || 0x00 || uint64_le(index) )
    key    = int.from_bytes(digest[:16], "little")
    rng    = numpy.random.Generator(numpy.random.Philox(key=key))

Philox is counter-based, so every ``(label, index)`` pair owns an independent
stream regardless of which worker consumes it or in what order.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

SYM_TOL = 1e-12
PSD_TOL = 1e-12


class DistributionSpec:
    """Law of the i.i.d. vectors fed to the channels."""

    kind: str

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def mean_cov(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` draws as an ``(n, dim)`` array."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _vec(x, name) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be a finite real vector")
    return arr


@dataclass(frozen=True, eq=False)
class Gaussian(DistributionSpec):
    mean: np.ndarray
    cov: np.ndarray
    kind = "gaussian"

    def __post_init__(self):
        mean = _vec(self.mean, "mean")
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        _sqrt_psd(cov)  # validates

    @property
    def dim(self):
        return self.mean.size

    def mean_cov(self):
        return self.mean.copy(), self.cov.copy()

    def sample(self, n, rng):
        return sample_gaussian(self.mean, self.cov, rng, size=n)

    def to_dict(self):
        return {"kind": self.kind, "mean": self.mean.tolist(), "cov": self.cov.tolist()}


@dataclass(frozen=True, eq=False)
class UniformBox(DistributionSpec):
    lo: np.ndarray
    hi: np.ndarray
    kind = "uniform_box"

    def __post_init__(self):
        lo, hi = _vec(self.lo, "lo"), _vec(self.hi, "hi")
        if lo.shape != hi.shape or not np.all(lo < hi):
            raise ValueError("uniform_box needs lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.size

    def mean_cov(self):
        return (self.lo + self.hi) / 2, np.diag((self.hi - self.lo) ** 2 / 12)

    def sample(self, n, rng):
        return self.lo + (self.hi - self.lo) * rng.random((n, self.dim))

    def to_dict(self):
        return {"kind": self.kind, "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class RademacherProduct(DistributionSpec):
    """``offset + scale * eps`` with independent fair signs per component."""

    scale: np.ndarray
    offset: np.ndarray
    kind = "rademacher"

    def __post_init__(self):
        scale, offset = _vec(self.scale, "scale"), _vec(self.offset, "offset")
        if scale.shape != offset.shape:
            raise ValueError("scale and offset must have equal length")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "offset", offset)

    @property
    def dim(self):
        return self.scale.size

    def mean_cov(self):
        return self.offset.copy(), np.diag(self.scale**2)

    def sample(self, n, rng):
        signs = 2.0 * rng.integers(0, 2, size=(n, self.dim)) - 1.0
        return self.offset + self.scale * signs

    def to_dict(self):
        return {"kind": self.kind, "scale": self.scale.tolist(), "offset": self.offset.tolist()}


@dataclass(frozen=True, eq=False)
class FiniteDiscrete(DistributionSpec):
    atoms: np.ndarray
    probs: np.ndarray
    kind = "finite_discrete"

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        probs = _vec(self.probs, "probs")
        if atoms.ndim != 2 or atoms.shape[0] != probs.size or probs.size == 0:
            raise ValueError("need one probability per atom")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probs must be nonnegative and sum to 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @property
    def dim(self):
        return self.atoms.shape[1]

    def mean_cov(self):
        mean = self.probs @ self.atoms
        centred = self.atoms - mean
        return mean, (centred.T * self.probs) @ centred

    def sample(self, n, rng):
        # inverse-CDF on one uniform per draw keeps the stream layout fixed
        cdf = np.cumsum(self.probs)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, rng.random(n), side="right")
        return self.atoms[np.minimum(idx, self.probs.size - 1)]

    def to_dict(self):
        return {"kind": self.kind, "atoms": self.atoms.tolist(), "probs": self.probs.tolist()}


_KINDS = {
    "gaussian": (Gaussian, ("mean", "cov")),
    "uniform_box": (UniformBox, ("lo", "hi")),
    "rademacher": (RademacherProduct, ("scale", "offset")),
    "finite_discrete": (FiniteDiscrete, ("atoms", "probs")),
}


def distribution_from_dict(d: dict) -> DistributionSpec:
    kind = d.get("kind")
    if kind not in _KINDS:
        raise ValueError(f"unknown distribution kind {kind!r}; expected one of {sorted(_KINDS)}")
    cls, fields = _KINDS[kind]
    missing = [f for f in fields if f not in d]
    if missing:
        raise ValueError(f"distribution {kind!r} missing field(s) {missing}")
    extra = set(d) - set(fields) - {"kind"}
    if extra:
        raise ValueError(f"distribution {kind!r} has unknown field(s) {sorted(extra)}")
    return cls(*(d[f] for f in fields))


def mean_cov(spec: DistributionSpec) -> tuple[np.ndarray, np.ndarray]:
    return spec.mean_cov()


def sample_iid(spec: DistributionSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return spec.sample(int(n), rng)


def _sqrt_psd(cov: np.ndarray) -> np.ndarray:
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be square")
    if np.max(np.abs(cov - cov.T), initial=0.0) > SYM_TOL:
        raise ValueError("covariance is not symmetric")
    if not np.any(cov):
        return np.zeros_like(cov)
    evals, evecs = np.linalg.eigh(cov)
    if evals.min() < -PSD_TOL:
        raise ValueError(f"covariance is indefinite (min eigenvalue {evals.min():.3g})")
    return (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T


def sample_gaussian(mean, cov, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw from ``N(mean, cov)`` through the symmetric square root of ``cov``."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    root = _sqrt_psd(cov)
    if root.shape[0] != mean.size:
        raise ValueError("mean and cov dimensions differ")
    n = 1 if size is None else int(size)
    z = rng.standard_normal((n, mean.size))
    out = mean + z @ root.T
    return out[0] if size is None else out


def wiener_path(times, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Standard Wiener process sampled at ``times`` (``w(0) = 0``)."""
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size and (times[0] < 0 or np.any(np.diff(times) < 0)):
        raise ValueError("times must be sorted and nonnegative")
    n = 1 if size is None else int(size)
    dt = np.diff(times, prepend=0.0)
    incs = rng.standard_normal((n, times.size)) * np.sqrt(dt)
    paths = np.cumsum(incs, axis=1)
    return paths[0] if size is None else paths


@dataclass(frozen=True)
class TriangularArraySpec:
    """Row ``n`` of ``xi_{n,k} = base_k / sqrt(n)`` for a 1-d unit-variance base law."""

    n: int
    base: DistributionSpec

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("row length must be positive")
        if self.base.dim != 1:
            raise ValueError("triangular arrays are one-dimensional")
        mu, cov = self.base.mean_cov()
        if abs(mu[0]) > 1e-12 or abs(cov[0, 0] - 1.0) > 1e-12:
            raise ValueError("base law must have mean 0 and variance 1")

    def sample_rows(self, rows: int, rng: np.random.Generator) -> np.ndarray:
        """``(rows, n)`` array; row ``r`` is one independent row of the array."""
        draws = self.base.sample(rows * self.n, rng).reshape(rows, self.n)
        return draws / np.sqrt(self.n)


@dataclass(frozen=True)
class SeedPolicy:
    master_seed: int
    rule: str = "sha256-philox"

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")
        if self.rule != "sha256-philox":
            raise ValueError(f"unknown stream rule {self.rule!r}")


def stream_key(policy: SeedPolicy, label: str, index: int) -> int:
    payload = (struct.pack("<Q", int(policy.master_seed)) + label.encode("utf-8")
               + b"\x00" + struct.pack("<Q", int(index)))
    return int.from_bytes(hashlib.sha256(payload).digest()[:16], "little")


def derive_rng(policy: SeedPolicy, stream_label: str, replica_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(policy, stream_label, replica_index)))
