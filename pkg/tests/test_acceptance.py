"""End-to-end acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints under
"acceptance criteria".  Run alone with ``pytest tests/test_acceptance.py``.
"""

import dataclasses
import time

import numpy as np
import pytest

from qlimits.channels import compose_shifts, conjugation_residual, shift
from qlimits.cli import main, preset_paths
from qlimits.density import KernelPoint, PureDensity, fourier_kernel_at, trace_distance_pure
from qlimits.experiments import fourier_dual, load_config, parse_experiment, run_experiment
from qlimits.lattice import FREQUENCY, GridSpec, frequency_axis, gaussian_packet, norm

from .conftest import ACCEPTANCE, random_state

pytestmark = pytest.mark.acceptance

DEFAULT_GRID = GridSpec(1, 16.0, 1024)


def record(k, title, ok, detail):
    ACCEPTANCE[k] = (title, bool(ok), detail)
    assert ok, f"AC{k:02d} {title}: {detail}"


def preset(name, **changes):
    path = preset_paths()[name]
    exp = parse_experiment(load_config(path), base_dir=path.parent)
    return dataclasses.replace(exp, **changes) if changes else exp


def test_ac01_fourier_shift_phase():
    rng = np.random.default_rng(101)
    u = random_state(DEFAULT_GRID, rng)
    base = PureDensity(u)
    sub = frequency_axis(DEFAULT_GRID)[::64]
    points = [KernelPoint(a, b, FREQUENCY) for a in sub for b in sub]
    ref = np.array([fourier_kernel_at(base, p) for p in points])
    diff = np.array([p.x[0] - p.y[0] for p in points])
    worst = 0.0
    for a in rng.uniform(-4, 4, size=20):
        moved = PureDensity(shift(u, a))
        got = np.array([fourier_kernel_at(moved, p) for p in points])
        worst = max(worst, float(np.max(np.abs(got - np.exp(1j * a * diff) * ref))))
    record(1, "Fourier image of a shifted kernel picks up the phase e^{i a(alpha-beta)}",
           worst < 1e-9, f"max residual {worst:.2e} over 20 shifts x 256 points (< 1e-9)")


def test_ac02_group_collapse():
    rng = np.random.default_rng(102)
    u = random_state(DEFAULT_GRID, rng)
    steps = rng.uniform(-0.5, 0.5, size=100)
    seq, drift = u, 0.0
    for a in steps[::-1]:
        nxt = shift(seq, a)
        drift = max(drift, abs(norm(nxt) - norm(seq)))
        seq = nxt
    diff = float(np.max(np.abs(seq.samples - compose_shifts(u, steps).samples)))
    seq_api = compose_shifts(u, steps, sequential=True)
    same = np.array_equal(seq_api.samples, seq.samples)
    record(2, "sequential shifts collapse to one shift by the sum",
           diff < 1e-9 and drift < 1e-12 and same,
           f"sup difference {diff:.2e} (< 1e-9), max norm drift per step {drift:.2e} (< 1e-12)")


def test_ac03_trace_norm_bound():
    rng = np.random.default_rng(103)
    worst = -np.inf
    for k in range(10_000):
        u = random_state(DEFAULT_GRID, rng, smooth=False)
        if k % 2:
            eps = 10.0 ** -rng.uniform(0, 9)
            noise = random_state(DEFAULT_GRID, rng, smooth=False)
            v = u + noise * eps
            v = v * (1 / norm(v))
        else:
            v = random_state(DEFAULT_GRID, rng, smooth=bool(rng.integers(2)))
        worst = max(worst, trace_distance_pure(u, v) - 2 * norm(u - v))
    record(3, "trace distance of pure states is at most 2|u - v|", worst <= 1e-12,
           f"max excess {worst:.2e} over 10^4 pairs (<= 1e-12)")


def test_ac04_strong_law():
    lines, ok = [], True
    for name, probe in (("slln_kernel", "kernel_origin"), ("slln_wot", "indicator_right")):
        rep = run_experiment(preset(name), seed=2026, workers=1)
        rows = rep.probe(probe)["rows"]
        first, last = rows[0], rows[-1]
        assert (first["n"], last["n"]) == (100, 10_000) and rep.config["replicas"] == 50
        ratio = first["error_median"] / last["error_median"]
        ok &= ratio >= 5 and last["error_median"] < 0.02
        lines.append(f"{probe}: median error {last['error_median']:.4f} at n=1e4, ratio {ratio:.1f}")
    record(4, "strong law for kernel and indicator probes (50 seeds)", ok,
           "; ".join(lines) + " (need < 0.02 and ratio >= 5)")


def test_ac05_clt_mean():
    exp = preset("clt_kernel")
    assert exp.replicas == 20_000 and exp.n_schedule[-1] == 400
    start = time.perf_counter()
    rep = run_experiment(exp, seed=2026, workers=1)
    elapsed = time.perf_counter() - start
    p = rep.probe("fourier_kernel_1_m1")
    base = fourier_kernel_at(PureDensity(exp.u), KernelPoint(1.0, -1.0, FREQUENCY))
    target = np.exp(-2.0) * base
    assert complex(*p["mean_target"]) == pytest.approx(target, abs=1e-15)
    final = [r for r in p["rows"] if r["n"] == 400]
    covers = [bool(r["ci_lo"] <= (target.real if r["part"] == "re" else target.imag) <= r["ci_hi"])
              for r in final]
    record(5, "CLT mean equals e^{-2} rho[Fu](1,-1) (99% CI, M=20000, n=400)",
           all(covers) and len(covers) == 2 and elapsed < 60,
           f"re/im covered {covers}, runtime {elapsed:.1f}s (<= 60s)")


def test_ac06_clt_distribution():
    kernel_exp = preset("clt_kernel", n_schedule=[400], replicas=5000,
                        probes=[p for p in preset("clt_kernel").probes if p.name == "fourier_kernel_1_m1"])
    wot_exp = preset("clt_wot", n_schedule=[400], replicas=5000,
                     probes=[p for p in preset("clt_wot").probes if p.name == "projector_initial"])
    passes = {"kernel re": 0, "kernel im": 0, "projector": 0}
    joint = 0
    for rep_idx in range(50):
        seed = 6000 + rep_idx
        k = run_experiment(kernel_exp, seed, workers=1).probe("fourier_kernel_1_m1")["rows"]
        w = run_experiment(wot_exp, seed, workers=1).probe("projector_initial")["rows"]
        level = kernel_exp.tolerances["ks_level"]
        this = {"kernel re": next(r for r in k if r["part"] == "re")["ks_p"] >= level,
                "kernel im": next(r for r in k if r["part"] == "im")["ks_p"] >= level,
                "projector": w[0]["ks_p"] >= level}
        for key, ok in this.items():
            passes[key] += ok
        joint += all(this.values())
    record(6, "KS vs Gaussian-shift references (M=5000, n=400, 50 seeds)",
           all(v >= 48 for v in passes.values()),
           ", ".join(f"{k} {v}/50" for k, v in passes.items())
           + f" (need >= 48 each; all three together {joint}/50)")


def test_ac07_clt_expectation():
    exp = preset("clt_wot")
    assert exp.replicas == 5000
    rep = run_experiment(exp, seed=2026, workers=1)
    row = rep.probe("projector_initial")["rows"][-1]
    record(7, "mean of tr-values matches the Gaussian-shift reference (Welch, M=5000)",
           row["welch_p"] >= 0.01, f"Welch p = {row['welch_p']:.3f} (>= 0.01)")


def test_ac08_random_walk():
    exp = preset("random_walk")
    assert exp.n_schedule == [2000] and exp.replicas == 2000
    rep = run_experiment(exp, seed=2026, workers=1)
    p = rep.probe("projector_initial")
    ks = {r["t"]: r["ks_p"] for r in p["rows"] if r["t"] in (0.25, 0.5, 1.0)}
    cross = p["clt_cross_check"][0]["ks_p"]
    record(8, "polygonal-line marginals match Wiener-shift references",
           all(v >= 0.01 for v in ks.values()) and len(ks) == 3 and cross >= 0.01,
           ", ".join(f"t={t}: p={v:.3f}" for t, v in ks.items()) + f"; t=1 vs CLT reference p={cross:.3f}")


def test_ac09_l1():
    exp = preset("l1_wot")
    assert exp.replicas == 2000
    rep = run_experiment(exp, seed=2026, workers=1)
    lines, ok = [], True
    for p in rep.probes:
        rows = p["rows"]
        ratio = rows[0]["error_mean"] / rows[-1]["error_mean"]
        bound = 2 * p["operator_norm_bound"]
        worst = max(r["error_max"] for r in rows)
        ok &= ratio > 5 and worst <= bound
        lines.append(f"{p['name']}: ratio {ratio:.1f}, max |D| {worst:.3f} <= {bound:g}")
    record(9, "L1 error decays 5x from n=1e2 to 1e4 and stays within 2|A|", ok, "; ".join(lines))


def test_ac10_impulse_conjugation():
    rng = np.random.default_rng(110)
    worst = max(conjugation_residual(random_state(DEFAULT_GRID, rng, smooth=bool(k % 2)),
                                     rng.uniform(-6, 6)) for k in range(100))
    exp = preset("impulse_slln")
    imp = run_experiment(exp, seed=2026, workers=1)
    dual = run_experiment(fourier_dual(exp), seed=2026, workers=1)
    gap = 0.0
    for p in dual.probes:
        for a, b in zip(imp.probe(p["name"])["rows"], p["rows"]):
            gap = max(gap, abs(a["error_median"] - b["error_median"]), abs(a["error_max"] - b["error_max"]))
    vac = imp.probe("indicator_right")
    ok = (worst < 1e-10 and gap < 1e-9 and vac["verdict"] == "vacuous"
          and imp.verdict == "pass" and dual.verdict == "pass")
    record(10, "impulse = Fourier-conjugated shift; multiplication probes flagged vacuous", ok,
           f"max residual {worst:.2e} (< 1e-10), impulse vs dual shift report gap {gap:.1e}, "
           f"multiplication probe verdict '{vac['verdict']}'")


def test_ac11_worker_determinism(tmp_path):
    same = []
    for name in ("clt_wot", "slln_wot"):
        outs = []
        for workers in (1, 8):
            out = tmp_path / f"{name}_{workers}"
            main(["run", "--config", f"preset:{name}", "--seed", "2026", "--out", str(out),
                  "--workers", str(workers)])
            outs.append((out / "report.json").read_bytes())
        same.append(outs[0] == outs[1] and len(outs[0]) > 0)
    record(11, "report.json is byte-identical with 1 and 8 workers", all(same),
           f"clt_wot {same[0]}, slln_wot {same[1]}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
