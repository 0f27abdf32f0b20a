"""Seeded Monte-Carlo runners, one per mode of convergence.

Randomness is drawn in fixed-size blocks of replicas.  Block ``b`` of stream
``label`` always uses ``derive_rng(seed, label, b)``, so a run is a pure
function of (experiment, seed) and does not depend on the worker count.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .. import kernels
from ..density import FiniteMatrix, KernelPoint, Multiplication, RankOne
from ..functionals import build_functional
from ..lattice import FREQUENCY, POSITION, WaveFunction, inverse_fourier
from ..random_sources import (
    SeedPolicy,
    TriangularArraySpec,
    derive_rng,
    sample_gaussian,
    wiener_path,
)
from ..statistics import ks_two_sample, mean_with_ci, welch_p_value
from .config import Experiment, Probe, packet_reach
from .report import ConvergenceReport

log = logging.getLogger(__name__)

WORKERS_ENV = "QLIMITS_WORKERS"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


def _package_version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


# --- block tasks -----------------------------------------------------------

def _functionals(exp: Experiment):
    return [build_functional(exp.u, p.target, exp.channel) for p in exp.probes]


def _eval_all(funcs, params, shape):
    flat = params.reshape(-1, params.shape[-1])
    return [f(flat).reshape(shape) for f in funcs]


def _budget(exp, params):
    """(number of parameters breaking the wrap-around budget, largest |parameter|)."""
    centre, spread, box = packet_reach(exp.u, exp.channel)
    flat = params.reshape(-1, params.shape[-1])
    moved = centre - flat if exp.channel == "shift" else centre + flat
    excess = int(np.count_nonzero(np.max(np.abs(moved), axis=1) + spread > box))
    return excess, float(np.max(np.abs(flat))) if flat.size else 0.0


def _prefix_block(exp, policy, b, size, funcs):
    """Nested prefix means of one i.i.d. stream per replica (a.s. and L1 runs)."""
    rng = derive_rng(policy, "xi", b)
    sched = np.asarray(exp.n_schedule)
    d = exp.grid.dim
    draws = exp.distribution.sample(size * int(sched[-1]), rng).reshape(size, -1, d)
    csum = np.cumsum(draws, axis=1)
    means = csum[:, sched - 1, :] / sched[None, :, None]
    return _eval_all(funcs, means, means.shape[:2]), _budget(exp, means)


def _clt_block(exp, policy, b, size, funcs):
    d = exp.grid.dim
    _, cov = exp.distribution.mean_cov()
    per_n, budgets = [], []
    for n in exp.n_schedule:
        rng = derive_rng(policy, f"xi/n={n}", b)
        draws = exp.distribution.sample(size * n, rng).reshape(size, n, d)
        sums = draws.sum(axis=1) / np.sqrt(n)
        per_n.append(_eval_all(funcs, sums, (size,)))
        budgets.append(_budget(exp, sums))
    eta = sample_gaussian(np.zeros(d), cov, derive_rng(policy, "eta", b), size=size)
    ref = _eval_all(funcs, eta, (size,))
    budgets.append(_budget(exp, eta))
    return (per_n, ref), _merge_budgets(budgets)


def _walk_block(exp, policy, b, size, funcs):
    times = np.asarray(exp.times)
    per_n, budgets = [], []
    for n in exp.n_schedule:
        rows = TriangularArraySpec(n, exp.distribution).sample_rows(size, derive_rng(policy, f"row/n={n}", b))
        partial = np.concatenate([np.zeros((size, 1)), np.cumsum(rows, axis=1)], axis=1)
        pos = times * n
        lo = np.minimum(np.floor(pos).astype(int), n)
        hi = np.minimum(lo + 1, n)
        frac = pos - lo
        needed = np.unique(np.concatenate([lo, hi]))
        where = {k: i for i, k in enumerate(needed)}
        pts = partial[:, needed][..., None]
        vals = _eval_all(funcs, pts, (size, needed.size))
        ilo = np.array([where[k] for k in lo])
        ihi = np.array([where[k] for k in hi])
        # polygonal line of the scalar functional, sampled at each t
        per_n.append([(1 - frac) * v[:, ilo] + frac * v[:, ihi] for v in vals])
        budgets.append(_budget(exp, pts))
    w = wiener_path(times, derive_rng(policy, "wiener", b), size=size)[..., None]
    ref = _eval_all(funcs, w, (size, times.size))
    _, cov = exp.distribution.mean_cov()
    eta = sample_gaussian(np.zeros(1), cov, derive_rng(policy, "eta", b), size=size)
    cross = _eval_all(funcs, eta, (size,))
    budgets += [_budget(exp, w), _budget(exp, eta)]
    return (per_n, ref, cross), _merge_budgets(budgets)


def _merge_budgets(items):
    return sum(i[0] for i in items), max(i[1] for i in items)


_BLOCK_TASKS = {"slln": _prefix_block, "l1": _prefix_block, "clt": _clt_block, "walk": _walk_block}


def _task(exp, seed, b, size):
    # worker-side entry point: functionals are rebuilt from the picklable experiment
    return _BLOCK_TASKS[exp.mode](exp, SeedPolicy(seed), b, size, _functionals(exp))


def _run_blocks(exp: Experiment, seed: int, workers: int):
    sizes = [min(exp.block_size, exp.replicas - s) for s in range(0, exp.replicas, exp.block_size)]
    if workers <= 1 or len(sizes) == 1:
        funcs = _functionals(exp)
        policy = SeedPolicy(seed)
        task = _BLOCK_TASKS[exp.mode]
        return [task(exp, policy, b, size, funcs) for b, size in enumerate(sizes)]
    with ProcessPoolExecutor(max_workers=min(workers, len(sizes))) as pool:
        futures = [pool.submit(_task, exp, seed, b, size) for b, size in enumerate(sizes)]
        return [f.result() for f in futures]


# --- summaries ---------------------------------------------------------------

def _summary(x, confidence):
    x = np.asarray(x, dtype=float)
    if x.size >= 2:
        s = mean_with_ci(x, confidence)
        return s.mean, s.ci_lo, s.ci_hi
    return float(x.mean()), float(x.mean()), float(x.mean())


def _parts(values, real_valued):
    if real_valued:
        return [("re", np.real(values))]
    return [("re", np.real(values)), ("im", np.imag(values))]


def _scalar(z, real_valued):
    return float(np.real(z)) if real_valued else complex(z)


def _probe_header(probe: Probe, func):
    out = {"name": probe.name, "kind": probe.kind, "vacuous": func.is_vacuous(),
           "real_valued": bool(func.real_valued)}
    if func.operator_norm_bound is not None:
        out["operator_norm_bound"] = float(func.operator_norm_bound)
    return out


def _finish(entry, ok):
    entry["verdict"] = "vacuous" if entry["vacuous"] else ("pass" if ok else "fail")
    return entry


def _summarise_prefix(exp, funcs, values):
    tol = exp.tolerances
    mu, _ = exp.distribution.mean_cov()
    sched = exp.n_schedule
    out = []
    for probe, func, vals in zip(exp.probes, funcs, values):
        limit = func(mu[None, :])[0]
        errs = np.abs(vals - limit)
        entry = _probe_header(probe, func)
        entry["limit"] = _scalar(limit, func.real_valued)
        rows, csv_rows = [], []
        for j, n in enumerate(sched):
            e = errs[:, j]
            mean, lo, hi = _summary(e, tol["ci_confidence"])
            row = {"n": n, "error_median": float(np.median(e)), "error_mean": mean,
                   "ci_lo": lo, "ci_hi": hi, "error_max": float(e.max()),
                   "error_quantiles": np.quantile(e, [0.05, 0.25, 0.5, 0.75, 0.95]).tolist()}
            rows.append(row)
            value = row["error_median"] if exp.mode == "slln" else mean
            csv_rows.append([n, "abs", value, lo, hi, None, None])
        entry["rows"] = rows
        entry["csv_rows"] = csv_rows
        key = "error_median" if exp.mode == "slln" else "error_mean"
        first, last = rows[0][key], rows[-1][key]
        exact = last <= tol["zero_error"]
        decays = len(rows) == 1 or exact or last * tol["decay_factor"] < first
        ok = decays
        checks = {"decay": bool(decays)}
        if exp.mode == "slln":
            checks["final_below_abs_error"] = bool(last <= tol["abs_error"])
            ok = ok and checks["final_below_abs_error"]
        else:
            bound = func.operator_norm_bound
            if bound is not None:
                ok_bound = bool(errs.max() <= 2 * bound + tol["bound_slack"])
                checks["uniform_bound"] = ok_bound
                entry["uniform_bound"] = 2 * bound
                ok = ok and ok_bound
        entry["checks"] = checks
        out.append(_finish(entry, ok))
    return out


def _analytic_clt_target(exp, probe, func):
    """Mean target ``exp(-(a-b)^T Sigma (a-b)/2) rho[Fu](a, b)`` for Fourier-kernel probes."""
    t = probe.target
    if exp.channel != "shift" or not isinstance(t, KernelPoint) or t.domain != FREQUENCY:
        return None
    _, cov = exp.distribution.mean_cov()
    diff = np.array(t.x) - np.array(t.y)
    base = func(np.zeros((1, exp.grid.dim)))[0]
    return complex(np.exp(-0.5 * diff @ cov @ diff) * base)


def _compare(vals, ref, real_valued, tol):
    """KS and Welch comparison of two samples, part by part."""
    rows = []
    for (part, a), (_, b) in zip(_parts(vals, real_valued), _parts(ref, real_valued)):
        ks = ks_two_sample(a, b)
        mean, lo, hi = _summary(a, tol["ci_confidence"])
        rows.append({"part": part, "mean": mean, "ci_lo": lo, "ci_hi": hi,
                     "reference_mean": float(np.mean(b)), "welch_p": welch_p_value(a, b),
                     "ks_D": ks.statistic, "ks_p": ks.p_value})
    return rows


def _summarise_clt(exp, funcs, per_n, ref):
    tol = exp.tolerances
    out = []
    for i, (probe, func) in enumerate(zip(exp.probes, funcs)):
        entry = _probe_header(probe, func)
        target = _analytic_clt_target(exp, probe, func)
        rows, csv_rows = [], []
        base = abs(func(np.zeros((1, exp.grid.dim)))[0])
        for j, n in enumerate(exp.n_schedule):
            vals = per_n[j][i]
            for row in _compare(vals, ref[i], func.real_valued, tol):
                row["n"] = n
                if target is not None:
                    t = target.real if row["part"] == "re" else target.imag
                    row["target"] = t
                    row["covers_target"] = bool(row["ci_lo"] <= t <= row["ci_hi"])
                rows.append(row)
                csv_rows.append([n, row["part"], row["mean"], row["ci_lo"], row["ci_hi"],
                                 row["ks_D"], row["ks_p"]])
            if target is not None:
                s = mean_with_ci(vals, tol["ci_confidence"])
                se = float(np.hypot(*s.std_error)) if isinstance(s.std_error, tuple) else s.std_error
                entry.setdefault("mean_modulus", []).append(
                    {"n": n, "modulus": abs(s.mean), "bound": base + 3 * se,
                     "ok": bool(abs(s.mean) <= base + 3 * se)})
        if target is not None:
            entry["mean_target"] = target
        entry["rows"] = rows
        entry["csv_rows"] = csv_rows
        final = [r for r in rows if r["n"] == exp.n_schedule[-1]]
        ks_ok = all(r["ks_p"] >= tol["ks_level"] for r in final)
        if target is not None:
            mean_ok = all(r["covers_target"] for r in final)
        else:
            mean_ok = all(r["welch_p"] >= tol["mean_level"] for r in final)
        entry["checks"] = {"ks": bool(ks_ok), "mean": bool(mean_ok)}
        out.append(_finish(entry, ks_ok and mean_ok))
    return out


def _summarise_walk(exp, funcs, per_n, ref, cross):
    tol = exp.tolerances
    out = []
    times = exp.times
    for i, (probe, func) in enumerate(zip(exp.probes, funcs)):
        entry = _probe_header(probe, func)
        rows, csv_rows = [], []
        last = len(exp.n_schedule) - 1
        for j, n in enumerate(exp.n_schedule):
            for k, t in enumerate(times):
                for row in _compare(per_n[j][i][:, k], ref[i][:, k], func.real_valued, tol):
                    row.update(n=n, t=t)
                    rows.append(row)
                    if j == last:
                        csv_rows.append([t, row["part"], row["mean"], row["ci_lo"], row["ci_hi"],
                                         row["ks_D"], row["ks_p"]])
        entry["rows"] = rows
        entry["csv_rows"] = csv_rows
        final = [r for r in rows if r["n"] == exp.n_schedule[-1]]
        ks_ok = all(r["ks_p"] >= tol["ks_level"] for r in final)
        checks = {"ks": bool(ks_ok)}
        if 1.0 in times:
            k = times.index(1.0)
            cc = _compare(per_n[last][i][:, k], cross[i], func.real_valued, tol)
            entry["clt_cross_check"] = cc
            checks["clt_cross_check"] = bool(all(r["ks_p"] >= tol["ks_level"] for r in cc))
        entry["checks"] = checks
        out.append(_finish(entry, all(checks.values())))
    return out


# --- entry points ------------------------------------------------------------

def run_experiment(exp: Experiment, seed: int, workers: int | None = None) -> ConvergenceReport:
    """Run ``exp`` with master seed ``seed``; the report does not depend on ``workers``."""
    workers = default_workers() if workers is None else int(workers)
    results = _run_blocks(exp, seed, workers)
    payloads = [r[0] for r in results]
    excess = sum(r[1][0] for r in results)
    largest = max(r[1][1] for r in results)
    funcs = _functionals(exp)

    if exp.mode in ("slln", "l1"):
        values = [np.concatenate([p[i] for p in payloads]) for i in range(len(funcs))]
        probes = _summarise_prefix(exp, funcs, values)
    elif exp.mode == "clt":
        per_n = [[np.concatenate([p[0][j][i] for p in payloads]) for i in range(len(funcs))]
                 for j in range(len(exp.n_schedule))]
        ref = [np.concatenate([p[1][i] for p in payloads]) for i in range(len(funcs))]
        probes = _summarise_clt(exp, funcs, per_n, ref)
    else:
        per_n = [[np.concatenate([p[0][j][i] for p in payloads]) for i in range(len(funcs))]
                 for j in range(len(exp.n_schedule))]
        ref = [np.concatenate([p[1][i] for p in payloads]) for i in range(len(funcs))]
        cross = [np.concatenate([p[2][i] for p in payloads]) for i in range(len(funcs))]
        probes = _summarise_walk(exp, funcs, per_n, ref, cross)

    warnings = []
    if excess:
        msg = (f"wrap-around budget exceeded by {excess} channel parameter(s); "
               f"largest |parameter| {largest:.4g}")
        log.warning(msg)
        warnings.append(msg)
    live = [p for p in probes if not p["vacuous"]]
    for p in probes:
        if p["vacuous"]:
            warnings.append(f"probe {p['name']!r} is vacuous: its value does not depend on the channel")
    if not live:
        verdict = "vacuous"
    else:
        verdict = "pass" if all(p["verdict"] == "pass" for p in live) else "fail"

    runtime = {"backend": kernels.BACKEND, "block_size": exp.block_size,
               "blocks": len(results), "package_version": _package_version()}
    report = ConvergenceReport(exp.theorem, exp.mode, exp.channel, int(seed), exp.echo, probes,
                               verdict, warnings, runtime)
    # hand back the serialised form so in-memory and reloaded reports are identical
    return ConvergenceReport.from_dict(report.to_dict())


def _runner(mode, channel):
    def run(exp: Experiment, seed: int, workers: int | None = None) -> ConvergenceReport:
        if exp.mode != mode or exp.channel != channel:
            raise ValueError(f"experiment {exp.theorem!r} does not match this runner")
        return run_experiment(exp, seed, workers)
    return run


run_slln_kernel = run_slln_wot = _runner("slln", "shift")
run_clt_kernel = run_clt_wot = _runner("clt", "shift")
run_l1_wot = _runner("l1", "shift")
run_random_walk = _runner("walk", "shift")
run_impulse_slln = _runner("slln", "impulse")
run_impulse_clt = _runner("clt", "impulse")
run_impulse_l1 = _runner("l1", "impulse")
run_impulse_walk = _runner("walk", "impulse")


# --- Fourier duality ----------------------------------------------------------

_DUAL_TAGS = {"impulse_slln": "slln_wot", "impulse_clt": "clt_wot",
              "impulse_l1": "l1_wot", "impulse_walk": "random_walk"}


def fourier_dual(exp: Experiment) -> Experiment:
    """Shift-channel experiment equivalent to an impulse-channel one.

    With ``G'`` the dual grid (its positions are this grid's frequencies) and
    ``D w = F_{G'}^{-1}[w read as frequency samples]``, one has
    ``F_{G'} S_s D u = R_s u`` sample for sample.  Probes are conjugated by
    ``D``; multiplication probes (constant under impulses) are dropped.
    Stream labels are shared, so both runs consume identical draws.
    """
    if exp.channel != "impulse":
        raise ValueError("fourier_dual expects an impulse-channel experiment")
    g = exp.grid.dual()

    def dual(w: WaveFunction) -> WaveFunction:
        return inverse_fourier(WaveFunction(g, w.samples, FREQUENCY))

    probes = []
    for p in exp.probes:
        t = p.target
        if isinstance(t, Multiplication):
            continue
        if isinstance(t, KernelPoint):
            if t.domain == POSITION:
                new = Probe(p.name, "fourier_kernel", KernelPoint(t.x, t.y, FREQUENCY))
            else:
                neg = KernelPoint(tuple(-v for v in t.x), tuple(-v for v in t.y), POSITION)
                new = Probe(p.name, "kernel", neg)
            new.target.indices(g)
        elif isinstance(t, RankOne):
            new = Probe(p.name, p.kind, RankOne(dual(t.v), dual(t.w)))
        elif isinstance(t, FiniteMatrix):
            new = Probe(p.name, p.kind, FiniteMatrix([dual(b) for b in t.basis], t.matrix))
        else:
            raise TypeError(f"cannot dualise probe {p.name!r}")
        probes.append(new)
    if not probes:
        raise ValueError("no probes survive the Fourier dual")
    echo = dict(exp.echo, theorem=_DUAL_TAGS[exp.theorem], derived_from="fourier_dual")
    return Experiment(_DUAL_TAGS[exp.theorem], exp.mode, "shift", g, dual(exp.u), exp.distribution,
                      list(exp.n_schedule), exp.replicas, probes, list(exp.times),
                      exp.block_size, dict(exp.tolerances), echo)
