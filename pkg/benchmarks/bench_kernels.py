"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat R] [--quick]

Times each hot kernel at experiment-sized inputs, then one end-to-end preset
run per backend (backends are swapped in place, so both runs share a process).
"""

import argparse
import time
import timeit

import numpy as np

from qlimits import kernels
from qlimits.cli import preset_paths
from qlimits.experiments import load_config, parse_experiment, run_experiment


def _cases(rng, quick):
    m = 2000 if quick else 20000
    c1 = rng.normal(size=2047) + 1j * rng.normal(size=2047)
    z = np.exp(1j * rng.uniform(-np.pi, np.pi, size=m))
    c2 = rng.normal(size=(128, 128)) + 1j * rng.normal(size=(128, 128))
    z0 = np.exp(1j * rng.uniform(-np.pi, np.pi, size=m // 10))
    z1 = np.exp(1j * rng.uniform(-np.pi, np.pi, size=m // 10))
    xs = np.sort(rng.normal(size=5000))
    ys = np.sort(rng.normal(size=5000))
    return {
        f"horner_1d  (2047 coeffs, {m} points)": lambda k: k.horner_1d(c1, z),
        f"horner_2d  (128x128 coeffs, {m // 10} points)": lambda k: k.horner_2d(c2, z0, z1),
        "ks_sweep   (5000 vs 5000, sorted)": lambda k: k.ks_sweep(xs, ys),
    }


def _use(backend):
    mod = kernels.get_backend(backend)
    kernels.horner_1d, kernels.horner_2d, kernels.ks_sweep = mod.horner_1d, mod.horner_2d, mod.ks_sweep


def _end_to_end(name, backend):
    path = preset_paths()[name]
    exp = parse_experiment(load_config(path), base_dir=path.parent)
    _use(backend)
    start = time.perf_counter()
    rep = run_experiment(exp, seed=1, workers=1)
    return time.perf_counter() - start, rep.to_json()


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--quick", action="store_true", help="smaller inputs, skip the end-to-end run")
    args = parser.parse_args()

    names = [b for b in ("compiled", "python") if b in kernels.BACKENDS]
    if "compiled" not in names:
        print("compiled extension not built; timing the python backend only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<44}" + "".join(f"{b:>12}" for b in names) + ("     speedup" if len(names) == 2 else ""))
    for label, fn in _cases(rng, args.quick).items():
        times = []
        for b in names:
            mod = kernels.get_backend(b)
            fn(mod)
            times.append(min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)))
        row = f"{label:<44}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>11.1f}x"
        print(row)

    if not args.quick:
        for preset in ("clt_kernel", "random_walk"):
            results = {b: _end_to_end(preset, b) for b in names}
            line = ", ".join(f"{b} {t:.2f}s" for b, (t, _) in results.items())
            reports = {r for _, r in results.values()}
            same = "identical reports" if len(reports) == 1 else "reports differ"
            print(f"end-to-end {preset}: {line} ({same})")
        _use(kernels.BACKEND)


if __name__ == "__main__":
    main()
