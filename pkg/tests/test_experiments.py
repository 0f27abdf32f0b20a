import copy
import json

import numpy as np
import pytest
from scipy import integrate, special

from qlimits.density import KernelPoint, PureDensity, fourier_kernel_at
from qlimits.experiments import (
    ConfigError,
    fourier_dual,
    parse_experiment,
    run_clt_kernel,
    run_clt_wot,
    run_experiment,
    run_impulse_slln,
    run_l1_wot,
    run_random_walk,
    run_slln_kernel,
    run_slln_wot,
)
from qlimits.cli import preset_paths
from qlimits.experiments.config import load_config

GAUSS = {"type": "gaussian", "center": [0.0], "width": 1.0, "momentum": [0.0]}
RADEMACHER = {"kind": "rademacher", "scale": [1.0], "offset": [0.3]}
UNIFORM = {"kind": "uniform_box", "lo": [-3**0.5], "hi": [3**0.5]}
IDENTITY = {"name": "identity", "kind": "multiplication", "function": {"type": "constant", "value": 1.0}}
INDICATOR = {"name": "indicator", "kind": "multiplication",
             "function": {"type": "indicator_halfspace", "axis": 0, "threshold": 0.0}}
PROJ = {"name": "proj", "kind": "projector", "state": "initial"}


def cfg(theorem, probes, dist=RADEMACHER, n_schedule=(100, 1000, 10000), replicas=50, **extra):
    out = {"format_version": 1, "theorem": theorem,
           "grid": {"dim": 1, "half_width": 16.0, "points": 1024},
           "initial_state": GAUSS, "distribution": dist, "n_schedule": list(n_schedule),
           "replicas": replicas, "probes": probes}
    out.update(extra)
    return parse_experiment(copy.deepcopy(out))


def point(x, y, kind="kernel"):
    keys = ("x", "y") if kind == "kernel" else ("alpha", "beta")
    return {"name": f"{kind}_{x}_{y}", "kind": kind, keys[0]: [x], keys[1]: [y]}


# --- a.s. runners -----------------------------------------------------------

def test_slln_deterministic_law_is_exact():
    dist = {"kind": "finite_discrete", "atoms": [[0.3]], "probs": [1.0]}
    rep = run_slln_kernel(cfg("slln_kernel", [point(0.0, 0.0), point(0.5, -0.5)], dist), seed=3)
    assert rep.verdict == "pass"
    for p in rep.probes:
        assert all(r["error_max"] <= 1e-10 for r in p["rows"])


def test_slln_kernel_limit_value():
    rep = run_slln_kernel(cfg("slln_kernel", [point(0.0, 0.0)]), seed=11)
    p = rep.probe("kernel_0.0_0.0")
    assert p["real_valued"]
    assert p["limit"] == pytest.approx(np.pi**-0.5 * np.exp(-0.09), abs=1e-12)
    med = [r["error_median"] for r in p["rows"]]
    assert med[-1] < 0.02 and med[-1] * 5 < med[0]
    assert rep.verdict == "pass"


def test_slln_symmetric_law_rate():
    rep = run_slln_kernel(cfg("slln_kernel", [point(0.5, 0.5)], UNIFORM), seed=5)
    med = rep.probe("kernel_0.5_0.5")["rows"][-1]["error_median"]
    # law has unit variance: n^{-1/2} scale at n = 10^4 is 0.01
    assert med < 10 * 0.01
    assert rep.verdict == "pass"


def _indicator_limit_oracle(mu):
    val, _ = integrate.quad(lambda x: np.pi**-0.5 * np.exp(-(x + mu)**2), 0, np.inf,
                            epsabs=1e-13, epsrel=1e-13)
    return val


def test_slln_wot_examples():
    dist = {"kind": "rademacher", "scale": [1.0], "offset": [0.5]}
    limit_proj = {"name": "proj_limit", "kind": "projector",
                  "state": {"type": "gaussian", "center": [-0.5], "width": 1.0, "momentum": [0.0]}}
    rep = run_slln_wot(cfg("slln_wot", [IDENTITY, INDICATOR, limit_proj], dist), seed=2)
    ident = rep.probe("identity")
    assert ident["vacuous"] and ident["verdict"] == "vacuous"
    assert all(r["error_max"] < 1e-12 for r in ident["rows"])
    assert rep.probe("proj_limit")["limit"] == pytest.approx(1.0, abs=1e-10)
    oracle = _indicator_limit_oracle(0.5)
    assert oracle == pytest.approx(special.erfc(0.5) / 2, abs=1e-12)
    # grid quadrature with the midpoint convention at the jump: O(h^2) error
    assert rep.probe("indicator")["limit"] == pytest.approx(oracle, abs=1e-4)
    assert rep.verdict == "pass"


def test_l1_examples():
    rep = run_l1_wot(cfg("l1_wot", [INDICATOR, PROJ], replicas=500), seed=8)
    ind = rep.probe("indicator")
    means = [r["error_mean"] for r in ind["rows"]]
    assert means[-1] < means[0] / 5
    assert ind["uniform_bound"] == pytest.approx(2.0)
    assert ind["checks"]["uniform_bound"]
    assert rep.verdict == "pass"
    dist = {"kind": "finite_discrete", "atoms": [[0.3]], "probs": [1.0]}
    det = run_l1_wot(cfg("l1_wot", [INDICATOR], dist, replicas=10), seed=8)
    assert all(r["error_mean"] < 1e-12 for r in det.probe("indicator")["rows"])


# --- distributional runners -------------------------------------------------

def test_clt_kernel_examples():
    probes = [point(1.0, -1.0, "fourier_kernel"), point(0.5, 0.5, "fourier_kernel")]
    # a grid with pi/L = 1/5 puts +-1 on the frequency axis
    raw = {"format_version": 1, "theorem": "clt_kernel",
           "grid": {"dim": 1, "half_width": 5 * np.pi, "points": 1024},
           "initial_state": {"type": "gaussian", "center": [0.5], "width": 1.0, "momentum": [0.3]},
           "distribution": UNIFORM, "n_schedule": [50], "replicas": 2000, "probes": probes}
    with pytest.raises(ConfigError):
        parse_experiment(raw)  # 0.5 is not a frequency node on this grid
    raw["probes"] = [point(1.0, -1.0, "fourier_kernel"), point(0.6, 0.6, "fourier_kernel")]
    exp = parse_experiment(raw)
    rep = run_clt_kernel(exp, seed=4)
    p = rep.probe("fourier_kernel_1.0_-1.0")
    base = fourier_kernel_at(PureDensity(exp.u), KernelPoint(1.0, -1.0, "frequency"))
    assert complex(*p["mean_target"]) == pytest.approx(np.exp(-2) * base, abs=1e-14)
    diag = rep.probe("fourier_kernel_0.6_0.6")
    assert diag["vacuous"] and diag["verdict"] == "vacuous"
    assert rep.verdict == "pass"


def test_clt_degenerate_law():
    dist = {"kind": "finite_discrete", "atoms": [[0.0]], "probs": [1.0]}
    rep = run_clt_wot(cfg("clt_wot", [PROJ, INDICATOR], dist, n_schedule=[10], replicas=20), seed=1)
    for p in rep.probes:
        for r in p["rows"]:
            assert r["ks_D"] == 0 and r["ci_lo"] == r["ci_hi"]
    assert rep.probe("proj")["rows"][0]["mean"] == pytest.approx(1.0)
    assert rep.verdict == "pass"


def test_clt_wot_reference_closed_form():
    rep = run_clt_wot(cfg("clt_wot", [PROJ], UNIFORM, n_schedule=[400], replicas=2000), seed=9)
    row = rep.probe("proj")["rows"][0]
    # E exp(-eta^2/2) for eta ~ N(0,1) is 1/sqrt(2)
    assert row["reference_mean"] == pytest.approx(2**-0.5, abs=4 * 0.2 / np.sqrt(2000))
    assert rep.verdict == "pass"


def test_walk_examples():
    rep = run_random_walk(cfg("random_walk", [PROJ, IDENTITY], UNIFORM, n_schedule=[500],
                              replicas=500, times=[0.0, 0.5, 1.0]), seed=6)
    proj = rep.probe("proj")
    at0 = [r for r in proj["rows"] if r["t"] == 0.0]
    assert all(r["mean"] == pytest.approx(1.0) and r["ks_D"] == 0 for r in at0)
    assert proj["checks"]["clt_cross_check"]
    assert rep.probe("identity")["verdict"] == "vacuous"
    assert rep.verdict == "pass"


# --- impulse runners and duality ------------------------------------------

def test_impulse_identity_law_and_vacuity():
    dist = {"kind": "finite_discrete", "atoms": [[0.0]], "probs": [1.0]}
    rep = run_impulse_slln(cfg("impulse_slln", [PROJ, INDICATOR], dist, replicas=5), seed=1)
    assert rep.probe("proj")["verdict"] == "pass"
    assert rep.probe("indicator")["verdict"] == "vacuous"
    assert any("indicator" in w for w in rep.warnings)


def test_fourier_dual_matches_impulse_run():
    moved = {"name": "moved", "kind": "rank_one",
             "v": {"type": "gaussian", "center": [0.5], "width": 1.0, "momentum": [0.4]}, "w": "initial"}
    exp = cfg("impulse_slln", [PROJ, moved, INDICATOR, point(0.0, 0.5)], replicas=20)
    dual = fourier_dual(exp)
    assert dual.channel == "shift" and [p.name for p in dual.probes] == ["proj", "moved", "kernel_0.0_0.5"]
    a, b = run_experiment(exp, seed=12, workers=1), run_experiment(dual, seed=12, workers=1)
    for p in dual.probes:
        ra, rb = a.probe(p.name), b.probe(p.name)
        assert np.allclose(np.ravel(ra["limit"]), np.ravel(rb["limit"]), atol=1e-9)
        for x, y in zip(ra["rows"], rb["rows"]):
            assert abs(x["error_median"] - y["error_median"]) < 1e-9
    assert a.verdict == "pass" and b.verdict == "pass"


def test_fourier_dual_rejects_shift_experiment():
    with pytest.raises(ValueError):
        fourier_dual(cfg("slln_wot", [PROJ]))


# --- validation -------------------------------------------------------------

@pytest.mark.parametrize("theorem, kwargs, field", [
    ("clt_wot", dict(probes=[PROJ], dist=RADEMACHER), "distribution"),
    ("slln_kernel", dict(probes=[PROJ]), "probes[0]"),
    ("slln_wot", dict(probes=[point(0.0, 0.0)]), "probes[0]"),
    ("slln_wot", dict(probes=[PROJ], n_schedule=[100, 100]), "n_schedule"),
    ("slln_wot", dict(probes=[PROJ, PROJ]), "probes[1].name"),
    ("slln_wot", dict(probes=[PROJ], times=[0.5]), "times"),
    ("random_walk", dict(probes=[PROJ], dist=UNIFORM, times=[0.5, 1.5]), "times"),
    ("random_walk", dict(probes=[PROJ], dist=UNIFORM), "times"),
    ("clt_wot", dict(probes=[PROJ], dist=UNIFORM, replicas=5), "replicas"),
    ("slln_wot", dict(probes=[PROJ], dist={"kind": "rademacher", "scale": [1.0], "offset": [12.0]}),
     "distribution"),
    ("slln_kernel", dict(probes=[point(0.01, 0.0)]), "probes[0] (kernel_0.01_0.0)"),
    ("slln_wot", dict(probes=[PROJ], tolerances={"ks_level": 2}), "tolerances.ks_level"),
])
def test_config_errors(theorem, kwargs, field):
    with pytest.raises(ConfigError) as info:
        cfg(theorem, **kwargs)
    assert info.value.where == field


def test_walk_requires_one_dimension():
    raw = {"format_version": 1, "theorem": "random_walk",
           "grid": {"dim": 2, "half_width": 8.0, "points": 128},
           "initial_state": {"type": "gaussian", "center": [0.0, 0.0], "width": 1.0,
                             "momentum": [0.0, 0.0]},
           "distribution": {"kind": "gaussian", "mean": [0.0, 0.0], "cov": [[1, 0], [0, 1]]},
           "n_schedule": [10], "replicas": 10, "times": [1.0], "probes": [PROJ]}
    with pytest.raises(ConfigError) as info:
        parse_experiment(raw)
    assert info.value.where == "grid.dim"


def test_presets_parse():
    paths = preset_paths()
    assert len(paths) == 10
    tags = set()
    for name, path in paths.items():
        exp = parse_experiment(load_config(path), base_dir=path.parent)
        tags.add(exp.theorem)
        assert json.loads(path.read_text())["theorem"] == name
    assert len(tags) == 10


def test_two_dimensional_slln_run():
    raw = {"format_version": 1, "theorem": "slln_wot",
           "grid": {"dim": 2, "half_width": 8.0, "points": 128},
           "initial_state": {"type": "gaussian", "center": [0.0, 0.0], "width": 1.0,
                             "momentum": [0.0, 0.0]},
           "distribution": {"kind": "gaussian", "mean": [0.2, -0.1], "cov": [[1, 0.3], [0.3, 0.5]]},
           "n_schedule": [100, 10000], "replicas": 30, "probes": [PROJ]}
    rep = run_slln_wot(parse_experiment(raw), seed=21)
    assert rep.probe("proj")["limit"] == pytest.approx(np.exp(-(0.2**2 + 0.1**2) / 2), abs=1e-10)
    assert rep.verdict == "pass"


def test_runner_tag_mismatch():
    with pytest.raises(ValueError):
        run_clt_wot(cfg("slln_wot", [PROJ]), seed=1)


def test_state_descriptors(tmp_path):
    from qlimits.experiments.config import build_state
    from qlimits.lattice import GridSpec, gaussian_packet, hermite_packet, inner

    g2 = GridSpec(2, 8.0, 128)
    ref = gaussian_packet(g2, [0.5, -0.5])
    np.save(tmp_path / "flat.npy", 3 * ref.samples.ravel())
    u = build_state({"type": "file", "path": "flat.npy"}, g2, "s", base_dir=tmp_path)
    assert abs(inner(u, ref) - 1) < 1e-12
    h = build_state({"type": "hermite", "order": [2, 1], "center": [0, 0], "width": 1.0}, g2, "s")
    assert abs(inner(h, hermite_packet(g2, [2, 1])) - 1) < 1e-12
    with pytest.raises(ConfigError):
        build_state({"type": "file", "path": "missing.npy"}, g2, "s", base_dir=tmp_path)
    with pytest.raises(ConfigError):
        build_state({"type": "hermite", "order": -1, "center": [0, 0], "width": 1.0}, g2, "s")
    with pytest.raises(ConfigError):
        build_state({"type": "gaussian", "center": [0, 0], "width": 0}, g2, "s")
