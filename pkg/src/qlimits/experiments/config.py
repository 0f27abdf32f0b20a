"""Experiment configuration: JSON schema checks and resolution into runnable objects.

A config is one JSON object.  Every field is explicit except ``seed_policy``
and the entries of ``tolerances``, whose defaults are listed in
``DEFAULT_TOLERANCES`` and ``DEFAULT_BLOCK_SIZE``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..density import (
    FiniteMatrix,
    KernelPoint,
    Multiplication,
    OffGridError,
    RankOne,
)
from ..lattice import (
    FREQUENCY,
    POSITION,
    GridSpec,
    WaveFunction,
    frequency_moments,
    hermite_packet,
    mesh,
    normalize,
    position_moments,
)
from ..random_sources import DistributionSpec, distribution_from_dict

FORMAT_VERSION = 1
DEFAULT_BLOCK_SIZE = 250
ZERO_MEAN_TOL = 1e-12

# mode, channel, allowed probe kinds
THEOREMS = {
    "slln_kernel": ("slln", "shift", "kernel"),
    "clt_kernel": ("clt", "shift", "kernel"),
    "slln_wot": ("slln", "shift", "operator"),
    "clt_wot": ("clt", "shift", "operator"),
    "l1_wot": ("l1", "shift", "operator"),
    "random_walk": ("walk", "shift", "operator"),
    "impulse_slln": ("slln", "impulse", "any"),
    "impulse_clt": ("clt", "impulse", "any"),
    "impulse_l1": ("l1", "impulse", "any"),
    "impulse_walk": ("walk", "impulse", "any"),
}

DEFAULT_TOLERANCES = {
    # a.s. runs: final median path error must be below abs_error ...
    "abs_error": 0.02,
    # ... and shrink by decay_factor from the first to the last n (also used by l1)
    "decay_factor": 5.0,
    # errors at or below this count as exact convergence (degenerate laws)
    "zero_error": 1e-9,
    "ks_level": 0.01,
    "ci_confidence": 0.99,
    "mean_level": 0.01,
    "bound_slack": 1e-12,
}

KERNEL_KINDS = ("kernel", "fourier_kernel")
OPERATOR_KINDS = ("multiplication", "projector", "rank_one", "finite_matrix")

REQUIRED = ("format_version", "theorem", "grid", "initial_state", "distribution",
            "n_schedule", "replicas", "probes")
OPTIONAL = ("times", "seed_policy", "tolerances", "description")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``where`` names the offending field."""

    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


@dataclass
class Probe:
    name: str
    kind: str
    target: object  # KernelPoint or BoundedOperator


@dataclass
class Experiment:
    theorem: str
    mode: str
    channel: str
    grid: GridSpec
    u: WaveFunction
    distribution: DistributionSpec
    n_schedule: list
    replicas: int
    probes: list
    times: list = field(default_factory=list)
    block_size: int = DEFAULT_BLOCK_SIZE
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    echo: dict = field(default_factory=dict)


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config ({exc.strerror})") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", f"malformed JSON ({exc.msg})") from None
    if not isinstance(cfg, dict):
        raise ConfigError(str(path), "top level must be a JSON object")
    return cfg


def _require(d, key, where):
    if not isinstance(d, dict):
        raise ConfigError(where, "expected an object")
    if key not in d:
        raise ConfigError(f"{where}.{key}" if where else key, "missing required field")
    return d[key]


def _vector(val, dim, where):
    arr = np.atleast_1d(np.asarray(val, dtype=float)) if _is_numeric(val) else None
    if arr is None or arr.ndim != 1 or arr.size != dim or not np.all(np.isfinite(arr)):
        raise ConfigError(where, f"expected a list of {dim} finite numbers")
    return arr


def _is_numeric(val):
    try:
        np.asarray(val, dtype=float)
    except (TypeError, ValueError):
        return False
    return True


def _complex_scalar(val, where):
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return complex(val)
    if isinstance(val, list) and len(val) == 2 and all(isinstance(v, (int, float)) for v in val):
        return complex(val[0], val[1])
    raise ConfigError(where, "expected a number or a [re, im] pair")


def parse_grid(d, where="grid") -> GridSpec:
    try:
        return GridSpec(_require(d, "dim", where), _require(d, "half_width", where),
                        _require(d, "points", where))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(where, str(exc)) from None


def build_state(spec, grid: GridSpec, where: str, base_dir: Path | None = None) -> WaveFunction:
    """Normalised position-domain state from a packet or file descriptor."""
    kind = _require(spec, "type", where)
    if kind in ("gaussian", "hermite"):
        center = _vector(_require(spec, "center", where), grid.dim, f"{where}.center")
        width = _require(spec, "width", where)
        if not isinstance(width, (int, float)) or width <= 0:
            raise ConfigError(f"{where}.width", "must be a positive number")
        momentum = _vector(spec.get("momentum", [0.0] * grid.dim), grid.dim, f"{where}.momentum")
        order = 0
        if kind == "hermite":
            order = _require(spec, "order", where)
            order_arr = np.atleast_1d(np.asarray(order))
            if order_arr.size not in (1, grid.dim) or np.any(order_arr < 0) \
                    or not np.all(order_arr == np.round(order_arr)):
                raise ConfigError(f"{where}.order", "expected nonnegative integer order(s)")
            order = order_arr.astype(int)
        u = hermite_packet(grid, order, center, float(width), momentum)
    elif kind == "file":
        rel = _require(spec, "path", where)
        path = Path(rel) if base_dir is None else Path(base_dir) / rel
        try:
            samples = np.load(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{where}.path", f"cannot load samples from {path} ({exc})") from None
        if samples.size != grid.points**grid.dim:
            raise ConfigError(f"{where}.path", f"expected {grid.points ** grid.dim} samples, "
                                               f"found {samples.size}")
        u = WaveFunction(grid, samples, POSITION)
    else:
        raise ConfigError(f"{where}.type", f"unknown state type {kind!r}")
    try:
        return normalize(u)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def _step(t):
    """Heaviside samples taking the midpoint value 1/2 on nodes at the jump."""
    return np.where(np.abs(t) <= 1e-12, 0.5, (t > 0).astype(float))


def _multiplier(spec, grid, where):
    kind = _require(spec, "type", where)
    coords = mesh(grid, POSITION)
    if kind == "constant":
        return np.full(grid.shape, _complex_scalar(_require(spec, "value", where), f"{where}.value"))
    if kind == "indicator_halfspace":
        axis = _require(spec, "axis", where)
        if not isinstance(axis, int) or not 0 <= axis < grid.dim:
            raise ConfigError(f"{where}.axis", f"must be an integer in [0, {grid.dim})")
        threshold = float(_require(spec, "threshold", where))
        return np.broadcast_to(_step(coords[axis] - threshold), grid.shape).copy()
    if kind == "indicator_box":
        lo = _vector(_require(spec, "lo", where), grid.dim, f"{where}.lo")
        hi = _vector(_require(spec, "hi", where), grid.dim, f"{where}.hi")
        inside = np.ones(grid.shape)
        for a, x in enumerate(coords):
            inside = inside * _step(x - lo[a]) * _step(hi[a] - x)
        return inside
    if kind == "gaussian":
        center = _vector(_require(spec, "center", where), grid.dim, f"{where}.center")
        width = float(_require(spec, "width", where))
        r2 = sum((x - center[a]) ** 2 for a, x in enumerate(coords))
        return np.exp(-r2 / (2 * width**2))
    raise ConfigError(f"{where}.type", f"unknown multiplier type {kind!r}")


def _state_ref(spec, grid, u, where, base_dir):
    if spec == "initial":
        return u
    return build_state(spec, grid, where, base_dir)


def parse_probe(spec, grid, u, where, base_dir=None) -> Probe:
    name = _require(spec, "name", where)
    kind = _require(spec, "kind", where)
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{where}.name", "must be a nonempty string")
    where = f"{where} ({name})"
    try:
        if kind in KERNEL_KINDS:
            keys = ("x", "y") if kind == "kernel" else ("alpha", "beta")
            domain = POSITION if kind == "kernel" else FREQUENCY
            a = _vector(_require(spec, keys[0], where), grid.dim, f"{where}.{keys[0]}")
            b = _vector(_require(spec, keys[1], where), grid.dim, f"{where}.{keys[1]}")
            point = KernelPoint(tuple(a), tuple(b), domain)
            point.indices(grid)
            return Probe(name, kind, point)
        if kind == "multiplication":
            m = _multiplier(_require(spec, "function", where), grid, f"{where}.function")
            return Probe(name, kind, Multiplication(grid, m))
        if kind == "projector":
            v = _state_ref(_require(spec, "state", where), grid, u, f"{where}.state", base_dir)
            return Probe(name, kind, RankOne(v, v))
        if kind == "rank_one":
            v = _state_ref(_require(spec, "v", where), grid, u, f"{where}.v", base_dir)
            w = _state_ref(_require(spec, "w", where), grid, u, f"{where}.w", base_dir)
            return Probe(name, kind, RankOne(v, w))
        if kind == "finite_matrix":
            basis_spec = _require(spec, "basis", where)
            if not isinstance(basis_spec, list) or not basis_spec:
                raise ConfigError(f"{where}.basis", "expected a nonempty list of states")
            basis = [_state_ref(b, grid, u, f"{where}.basis[{i}]", base_dir)
                     for i, b in enumerate(basis_spec)]
            mat = _require(spec, "matrix", where)
            if isinstance(mat, dict):
                re = np.asarray(_require(mat, "re", f"{where}.matrix"), dtype=float)
                im = np.asarray(mat.get("im", np.zeros_like(re)), dtype=float)
                mat = re + 1j * im
            return Probe(name, kind, FiniteMatrix(basis, np.asarray(mat, dtype=complex)))
    except OffGridError as exc:
        raise ConfigError(where, f"probe off grid: {exc}") from None
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from None
    raise ConfigError(f"{where}.kind", f"unknown probe kind {kind!r}")


def parse_experiment(cfg: dict, base_dir=None) -> Experiment:
    """Validate ``cfg`` and build an :class:`Experiment`; raises :class:`ConfigError`."""
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be a JSON object")
    for key in REQUIRED:
        _require(cfg, key, "")
    unknown = set(cfg) - set(REQUIRED) - set(OPTIONAL)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    if cfg["format_version"] != FORMAT_VERSION:
        raise ConfigError("format_version", f"unsupported version {cfg['format_version']!r}")

    tag = cfg["theorem"]
    if tag not in THEOREMS:
        raise ConfigError("theorem", f"unknown theorem tag {tag!r}; expected one of {sorted(THEOREMS)}")
    mode, channel, allowed = THEOREMS[tag]

    grid = parse_grid(cfg["grid"])
    u = build_state(cfg["initial_state"], grid, "initial_state", base_dir)

    try:
        dist = distribution_from_dict(cfg["distribution"])
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError("distribution", str(exc)) from None
    if dist.dim != grid.dim:
        raise ConfigError("distribution", f"law has dimension {dist.dim}, grid has {grid.dim}")
    mu, cov = dist.mean_cov()
    if mode in ("clt", "walk") and np.max(np.abs(mu)) > ZERO_MEAN_TOL:
        raise ConfigError("distribution", f"theorem {tag!r} assumes zero-mean random vectors "
                                          f"(got mean {mu.tolist()})")
    if mode == "walk":
        if grid.dim != 1:
            raise ConfigError("grid.dim", "the random-walk theorem is stated for d = 1")
        if abs(cov[0, 0] - 1.0) > 1e-12:
            raise ConfigError("distribution", "random-walk base law must have variance 1")

    sched = cfg["n_schedule"]
    if (not isinstance(sched, list) or not sched
            or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in sched)):
        raise ConfigError("n_schedule", "expected a nonempty list of positive integers")
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise ConfigError("n_schedule", "must be strictly increasing")

    replicas = cfg["replicas"]
    min_rep = 8 if mode in ("clt", "walk") else 1
    if not isinstance(replicas, int) or isinstance(replicas, bool) or replicas < min_rep:
        raise ConfigError("replicas", f"must be an integer >= {min_rep}")

    times = []
    if mode == "walk":
        times = _require(cfg, "times", "")
        if (not isinstance(times, list) or not times
                or not all(isinstance(t, (int, float)) and 0 <= t <= 1 for t in times)):
            raise ConfigError("times", "expected a nonempty list of numbers in [0, 1]")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("times", "must be strictly increasing")
        times = [float(t) for t in times]
    elif "times" in cfg:
        raise ConfigError("times", f"only used by the random-walk theorems, not {tag!r}")

    probe_specs = cfg["probes"]
    if not isinstance(probe_specs, list) or not probe_specs:
        raise ConfigError("probes", "expected a nonempty list")
    probes, names = [], set()
    for i, spec in enumerate(probe_specs):
        probe = parse_probe(spec, grid, u, f"probes[{i}]", base_dir)
        if probe.name in names:
            raise ConfigError(f"probes[{i}].name", f"duplicate probe name {probe.name!r}")
        names.add(probe.name)
        if allowed == "kernel" and probe.kind not in KERNEL_KINDS:
            raise ConfigError(f"probes[{i}]", f"{tag!r} takes kernel probes, not {probe.kind!r}")
        if allowed == "operator" and probe.kind not in OPERATOR_KINDS:
            raise ConfigError(f"probes[{i}]", f"{tag!r} takes operator probes, not {probe.kind!r}")
        probes.append(probe)

    policy = cfg.get("seed_policy", {})
    if not isinstance(policy, dict):
        raise ConfigError("seed_policy", "expected an object")
    if policy.get("rule", "sha256-philox") != "sha256-philox":
        raise ConfigError("seed_policy.rule", "only 'sha256-philox' is supported")
    block = policy.get("block_size", DEFAULT_BLOCK_SIZE)
    if not isinstance(block, int) or isinstance(block, bool) or block < 1:
        raise ConfigError("seed_policy.block_size", "must be a positive integer")
    unknown = set(policy) - {"rule", "block_size"}
    if unknown:
        raise ConfigError(f"seed_policy.{sorted(unknown)[0]}", "unknown field")

    tolerances = dict(DEFAULT_TOLERANCES)
    tol_cfg = cfg.get("tolerances", {})
    if not isinstance(tol_cfg, dict):
        raise ConfigError("tolerances", "expected an object")
    for key, val in tol_cfg.items():
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{key}", "unknown tolerance")
        if not isinstance(val, (int, float)) or isinstance(val, bool) or val < 0:
            raise ConfigError(f"tolerances.{key}", "must be a nonnegative number")
        tolerances[key] = float(val)
    for key in ("ks_level", "mean_level", "ci_confidence"):
        if not 0 < tolerances[key] < 1:
            raise ConfigError(f"tolerances.{key}", "must lie in (0, 1)")

    _check_wraparound(tag, mode, channel, grid, u, mu)

    return Experiment(tag, mode, channel, grid, u, dist, list(sched), replicas, probes,
                      times, block, tolerances, json.loads(json.dumps(cfg)))


def packet_reach(u: WaveFunction, channel: str) -> tuple[np.ndarray, float, float]:
    """(centre, 6-sigma spread, box half-width) in the space the channel moves."""
    if channel == "shift":
        centre, sigma = position_moments(u)
        return centre, 6 * sigma, u.grid.half_width
    centre, sigma = frequency_moments(u)
    return centre, 6 * sigma, pi_over_h(u.grid)


def pi_over_h(grid: GridSpec) -> float:
    return float(np.pi / grid.spacing)


def _check_wraparound(tag, mode, channel, grid, u, mu):
    if mode in ("clt", "walk"):
        return
    centre, spread, box = packet_reach(u, channel)
    # S_mu moves the packet to centre - mu; R_mu moves its spectrum to centre + mu
    moved = centre - mu if channel == "shift" else centre + mu
    if np.max(np.abs(moved)) + spread > box:
        raise ConfigError("distribution", f"wrap-around budget exceeded for {tag!r}: limit packet "
                                          f"reaches {np.max(np.abs(moved)) + spread:.3g} > {box:.3g}")
